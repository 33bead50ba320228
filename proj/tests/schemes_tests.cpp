// The three fee-delegation constructions end to end against real blocks:
// relayed pairs, miner-targeted fee followers, and unidirectional fee
// channels with proofs, acks, settlement and timeout refunds.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "metasim/block_builder.hpp"
#include "metasim/schemes/channel_ops.hpp"
#include "metasim/schemes/miner.hpp"
#include "metasim/schemes/relayer.hpp"

using namespace metasim;
using namespace metasim::schemes;
using chain::Block;
using chain::Ledger;
using chain::MinerProfile;
using chain::MinerView;
using chain::SimConfig;

namespace {

// Mines `txs` (exactly, in order) into the next block by `miner`.
Ledger mine(const Ledger& ledger, const Address& miner,
            std::vector<Transaction> txs, const SimConfig& cfg) {
    Block b;
    b.height = ledger.height() + 1;
    b.parent = ledger.chain.empty() ? zero_hash() : block_hash(ledger.chain.back());
    b.miner_id = miner;
    b.txs = std::move(txs);
    std::vector<TxId> ids;
    for (const auto& tx : b.txs) ids.push_back(tx_id(tx));
    b.merkle_root = chain::merkle_root(ids);
    b.gas_used = b.txs.size() * cfg.base_tx_gas;
    auto next = chain::apply_block(ledger, b, cfg);
    REQUIRE(next.ok());
    return next.value();
}

Ledger mine_empty(Ledger ledger, const Address& miner, int n, const SimConfig& cfg) {
    for (int i = 0; i < n; ++i) ledger = mine(ledger, miner, {}, cfg);
    return ledger;
}

// Inclusion proof for a mined transaction, built from the stored chain.
chain::MerkleProof prove_mined(const Ledger& ledger, const TxId& id) {
    const auto& at = ledger.mined_index.at(id);
    const Block& b = ledger.chain[at.height - 1];
    std::vector<TxId> ids;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
        ids.push_back(tx_id(b.txs[i]));
        if (ids.back() == id) pos = i;
    }
    return chain::merkle_prove(ids, pos).value();
}

}  // namespace

// ---------------------------------------------------------------- relayer

TEST_CASE("relayer: cooperative flow nets out in both currencies") {
    const Address alice = derived_address(1), relayer = derived_address(2);
    const Address target = derived_address(3);
    SimConfig cfg;
    MinerProfile mp{derived_address(100), 1.0, true};
    Ledger st;
    st.balances_native[relayer] = 50;
    st.balances_meta[alice] = 40;

    RelayerRequest req;
    req.sender = alice;
    req.target = target;
    req.meta_fee_offered = 8;
    auto res = relayer_submit(req, relayer, true, st, 3);
    REQUIRE(res.ok());
    REQUIRE(res.value().has_value());
    const auto& [action, reimburse] = *res.value();

    CHECK(action.sender == relayer);
    CHECK(action.fee_native == 3);
    CHECK(reimburse.sender == alice);
    CHECK(reimburse.fee_native == 0);
    CHECK(reimburse.fee_meta == 8);
    CHECK(reimburse.receiver == relayer);
    CHECK(reimburse.delta == tx_id(action));

    Block b = chain::build_block({action, reimburse}, mp, st, cfg);
    REQUIRE(b.txs.size() == 2);
    CHECK(tx_id(b.txs[0]) == tx_id(action));
    auto next = chain::apply_block(st, b, cfg);
    REQUIRE(next.ok());
    // Relayer: paid the native fee, earned the meta reimbursement.
    CHECK(next.value().native_of(relayer) == 50 - 3);
    CHECK(next.value().meta_of(relayer) == 8);
    CHECK(next.value().meta_of(alice) == 40 - 8);
    CHECK(next.value().native_of(mp.miner_id) == cfg.coinbase_native + 3);
}

TEST_CASE("relayer: the receiver can be the one reimbursing") {
    const Address alice = derived_address(1), relayer = derived_address(2);
    const Address target = derived_address(3);
    Ledger st;
    st.balances_native[relayer] = 50;
    st.balances_meta[target] = 40;

    RelayerRequest req;
    req.sender = alice;
    req.target = target;
    req.meta_fee_offered = 8;
    req.fee_payer = FeePayer::Receiver;
    auto res = relayer_submit(req, relayer, true, st, 3);
    REQUIRE(res.ok());
    CHECK(res.value()->second.sender == target);
}

TEST_CASE("relayer: censorship yields nothing at all") {
    const Address alice = derived_address(1), relayer = derived_address(2);
    Ledger st;
    st.balances_native[relayer] = 50;
    st.balances_meta[alice] = 40;

    RelayerRequest req;
    req.sender = alice;
    req.target = derived_address(3);
    req.meta_fee_offered = 8;
    auto res = relayer_submit(req, relayer, false, st, 3);
    REQUIRE(res.ok());
    CHECK(!res.value().has_value());
}

TEST_CASE("relayer: funding failures abort atomically") {
    const Address alice = derived_address(1), relayer = derived_address(2);
    Ledger st;  // everyone broke

    RelayerRequest req;
    req.sender = alice;
    req.target = derived_address(3);
    req.meta_fee_offered = 8;

    auto r1 = relayer_submit(req, relayer, true, st, 3);
    REQUIRE(!r1.ok());
    CHECK(r1.error() == RelayerError::RelayerInsufficientNativeFunds);

    st.balances_native[relayer] = 50;
    auto r2 = relayer_submit(req, relayer, true, st, 3);
    REQUIRE(!r2.ok());
    CHECK(r2.error() == RelayerError::FeePayerInsufficientMetaFunds);

    st.balances_meta[alice] = 40;
    req.meta_fee_offered = 0;
    CHECK(relayer_submit(req, relayer, true, st, 3).error() ==
          RelayerError::ZeroMetaFeeOffered);
}

// ---------------------------------------------------------------- miner scheme

TEST_CASE("miner scheme: single metatransaction, pooled or direct") {
    const Address s = derived_address(1);
    Ledger st;
    st.balances_meta[s] = 100;

    ActionSpec act;
    act.target = derived_address(3);
    act.amount = 0;
    act.payload = PayloadKind::Noop;

    SUBCASE("pooled fee accrues at the anyone-can-spend address") {
        auto m = miner_metatx_issue(s, act, 10, false, st);
        REQUIRE(m.ok());
        const auto& pair = m.value();
        REQUIRE(pair.tx0.has_value());
        CHECK(pair.tx1.receiver == anyone_can_spend_address());
        CHECK(pair.tx0->nonce + 1 == pair.tx1.nonce);
        CHECK(validate_metatx(pair).ok());
    }
    SUBCASE("direct fee rides the current-miner sentinel to whoever mines it") {
        auto m = miner_metatx_issue(s, act, 10, true, st);
        REQUIRE(m.ok());
        CHECK(is_current_miner_sentinel(m.value().tx1.receiver));

        SimConfig cfg;
        MinerProfile mp{derived_address(100), 1.0, true};
        Block b = chain::build_block({*m.value().tx0, m.value().tx1}, mp, st, cfg);
        REQUIRE(b.txs.size() == 2);
        auto next = chain::apply_block(st, b, cfg);
        REQUIRE(next.ok());
        CHECK(next.value().meta_of(mp.miner_id) == 10);
    }
    SUBCASE("the fee transaction alone is stuck behind its own nonce") {
        auto m = miner_metatx_issue(s, act, 10, false, st);
        // Without tx0, tx1 sits one nonce ahead of the account forever.
        CHECK(chain::apply_tx(st, m.value().tx1, derived_address(100), 1, {})
                  .error() == chain::BlockError::NonceGap);
        MinerProfile mp{derived_address(100), 1.0, true};
        SimConfig cfg;
        CHECK(chain::build_block({m.value().tx1}, mp, st, cfg).txs.empty());
    }
    SUBCASE("meta balance must cover amounts plus fee") {
        ActionSpec send;
        send.target = derived_address(3);
        send.amount = 95;
        send.payload = PayloadKind::TransferMeta;
        auto m = miner_metatx_issue(s, send, 10, false, st);
        REQUIRE(!m.ok());
        CHECK(m.error() == MinerSchemeError::InsufficientMetaBalance);
    }
}

TEST_CASE("miner scheme: batches") {
    const Address s = derived_address(1);
    SimConfig cfg;
    Ledger st;
    st.balances_meta[s] = 100;

    ActionSpec act;
    act.target = derived_address(3);
    act.amount = 2;
    act.payload = PayloadKind::TransferMeta;

    SUBCASE("a one-action batch is exactly the single issue") {
        auto one = miner_metatx_batch(s, {act}, 10, false, st, cfg).value();
        auto single = miner_metatx_issue(s, act, 10, false, st).value();
        REQUIRE(one.first.size() == 1);
        CHECK(tx_id(one.first[0]) == tx_id(*single.tx0));
        CHECK(tx_id(one.second) == tx_id(single.tx1));
    }
    SUBCASE("three actions and the fee land atomically in one block") {
        auto batch = miner_metatx_batch(s, {act, act, act}, 10, false, st, cfg);
        REQUIRE(batch.ok());
        std::vector<Transaction> pool = batch.value().first;
        pool.push_back(batch.value().second);
        MinerProfile mp{derived_address(100), 1.0, true};
        Block b = chain::build_block(pool, mp, st, cfg);
        REQUIRE(b.txs.size() == 4);
        CHECK(tx_id(b.txs[3]) == tx_id(batch.value().second));
        auto next = chain::apply_block(st, b, cfg);
        REQUIRE(next.ok());
        CHECK(next.value().meta_of(anyone_can_spend_address()) == 10);
        CHECK(next.value().meta_of(act.target) == 6);
    }
    SUBCASE("a batch that cannot fit in any block is refused up front") {
        std::vector<ActionSpec> too_many(cfg.block_gas_limit / cfg.base_tx_gas,
                                         act);
        auto r = miner_metatx_batch(s, too_many, 10, false, st, cfg);
        REQUIRE(!r.ok());
        CHECK(r.error() == MinerSchemeError::BatchExceedsBlockCapacity);
    }
    SUBCASE("empty batches are meaningless") {
        CHECK(miner_metatx_batch(s, {}, 10, false, st, cfg).error() ==
              MinerSchemeError::EmptyBatch);
    }
}

// ---------------------------------------------------------------- channels

TEST_CASE("channel: open escrows the collateral") {
    const Address s = derived_address(1), m = derived_address(100);
    SimConfig cfg;
    Ledger st;
    st.balances_meta[s] = 1500;

    SUBCASE("zero collateral is not a channel") {
        CHECK(channel_open(s, m, 0, 50, st).error() ==
              ChannelError::InsufficientCollateral);
        CHECK(channel_open(s, m, 2000, 50, st).error() ==
              ChannelError::InsufficientCollateral);
    }
    SUBCASE("funded open") {
        auto r = channel_open(s, m, 1000, 50, st);
        REQUIRE(r.ok());
        const auto& [ch, open_tx] = r.value();
        CHECK(ch.sender_balance == 1000);
        CHECK(ch.miner_balance == 0);
        CHECK(ch.channel_id == channel_id_for(s, m, 0));

        Ledger after = mine(st, m, {open_tx}, cfg);
        CHECK(after.meta_of(s) == 500);
        CHECK(after.meta_of(channel_contract_address()) == 1000);
        REQUIRE(after.channels.count(ch.channel_id) == 1);
        CHECK(after.channels.at(ch.channel_id).phase == ChannelPhase::Open);
        CHECK(after.channels.at(ch.channel_id).opened_at == 1);

        // Same open transaction cannot land twice.
        CHECK(!chain::apply_tx(after, open_tx, m, 2, {}).ok());
    }
}

TEST_CASE("channel: pay/commit walks the cumulative balance") {
    const Address s = derived_address(1), m = derived_address(100);
    Ledger st;
    st.balances_meta[s] = 100;
    Channel ch = channel_open(s, m, 30, 50, st).value().first;

    Transaction tx0;
    tx0.sender = s;
    tx0.payload = PayloadKind::Noop;

    std::uint64_t expected = 0;
    for (int i = 1; i <= 3; ++i) {
        tx0.nonce = i;
        auto agg = channel_pay(ch, 10, tx0);
        REQUIRE(agg.ok());
        expected += 10;
        CHECK(agg.value().index == (std::uint64_t)i);
        CHECK(agg.value().cumulative_miner_balance == expected);
        CHECK(agg.value().referenced_tx0.size() == (std::size_t)i);
        ch = commit_payment(ch, agg.value()).value();
        CHECK(ch.miner_balance == expected);
        CHECK(ch.sender_balance == 30 - expected);
    }

    // Depleted exactly at the collateral: no fourth payment.
    tx0.nonce = 4;
    CHECK(channel_pay(ch, 10, tx0).error() == ChannelError::ChannelDepleted);
    CHECK(channel_pay(ch, 0, tx0).error() == ChannelError::ZeroFee);
}

TEST_CASE("channel: commit rejects stale, foreign and overdrawn updates") {
    const Address s = derived_address(1), m = derived_address(100);
    Ledger st;
    st.balances_meta[s] = 100;
    Channel ch = channel_open(s, m, 30, 50, st).value().first;

    Transaction tx0;
    tx0.sender = s;
    tx0.payload = PayloadKind::Noop;
    auto agg1 = channel_pay(ch, 10, tx0).value();
    Channel ch1 = commit_payment(ch, agg1).value();

    CHECK(commit_payment(ch1, agg1).error() == ChannelError::StaleAggregation);

    auto wrong = agg1;
    wrong.channel_id[0] ^= 1;
    CHECK(commit_payment(ch, wrong).error() == ChannelError::WrongChannel);

    auto fat = channel_pay(ch1, 10, tx0).value();
    fat.cumulative_miner_balance = 31;  // beyond the escrow
    CHECK(commit_payment(ch1, fat).error() == ChannelError::ChannelDepleted);

    auto short_refs = channel_pay(ch1, 10, tx0).value();
    short_refs.referenced_tx0.pop_back();
    CHECK(commit_payment(ch1, short_refs).error() == ChannelError::ProofInvalid);
}

TEST_CASE("channel: inclusion policy picks exactly the covered zero-fee txs") {
    const Address s = derived_address(1);
    const Address m1 = derived_address(100);
    Ledger st;
    st.balances_meta[s] = 100;
    Channel ch1 = channel_open(s, m1, 50, 50, st).value().first;

    Transaction tx0;
    tx0.sender = s;
    tx0.nonce = 1;
    tx0.payload = PayloadKind::Noop;

    SUBCASE("no aggregation: nothing is secured") {
        CHECK(miner_policy_channel({tx0}, {ch1}, {}).empty());
    }
    SUBCASE("aggregation on my channel secures the fee") {
        auto agg = channel_pay(ch1, 5, tx0).value();
        auto picked = miner_policy_channel({tx0}, {ch1}, {agg});
        REQUIRE(picked.size() == 1);
        CHECK(tx_id(picked[0]) == tx_id(tx0));
    }
    SUBCASE("an update for someone else's channel is worthless to me") {
        auto agg = channel_pay(ch1, 5, tx0).value();
        // m2 evaluates the same mempool but holds no channel with s.
        CHECK(miner_policy_channel({tx0}, {}, {agg}).empty());
    }
    SUBCASE("unsigned or non-extending updates secure nothing") {
        auto agg = channel_pay(ch1, 5, tx0).value();
        agg.sender_signature_present = false;
        CHECK(miner_policy_channel({tx0}, {ch1}, {agg}).empty());

        auto replay = channel_pay(ch1, 5, tx0).value();
        replay.index = 0;
        CHECK(miner_policy_channel({tx0}, {ch1}, {replay}).empty());
    }
    SUBCASE("fee-paying transactions are not the policy's business") {
        Transaction paying = tx0;
        paying.fee_native = 1;
        auto agg = channel_pay(ch1, 5, paying).value();
        CHECK(miner_policy_channel({paying}, {ch1}, {agg}).empty());
    }
}

TEST_CASE("channel: full lifecycle with inclusion proofs") {
    const Address s = derived_address(1), m = derived_address(100);
    SimConfig cfg;
    Ledger st;
    st.balances_meta[s] = 200;

    auto opened = channel_open(s, m, 100, 50, st).value();
    Channel ch = opened.first;
    st = mine(st, m, {opened.second}, cfg);

    // Three covered payments of 10, each mined by the channel's miner.
    for (int i = 0; i < 3; ++i) {
        Transaction tx0;
        tx0.sender = s;
        tx0.receiver = derived_address(9);
        tx0.amount = 1;
        tx0.nonce = st.nonce_of(s);
        tx0.payload = PayloadKind::TransferMeta;
        auto agg = channel_pay(ch, 10, tx0).value();
        st = mine(st, m, {tx0}, cfg);
        ch = commit_payment(ch, agg).value();
    }
    CHECK(ch.miner_balance == 30);

    AggregationTx final_agg;
    final_agg.channel_id = ch.channel_id;
    final_agg.index = ch.seq;
    final_agg.cumulative_miner_balance = ch.miner_balance;
    final_agg.referenced_tx0 = ch.covered_tx0;

    SUBCASE("proof-backed close settles 30/70") {
        SettlementEvidence ev;
        for (const auto& id : ch.covered_tx0)
            ev.proofs.push_back(prove_mined(st, id));
        auto settle = channel_close_by_miner(ch, final_agg, ev, st);
        REQUIRE(settle.ok());
        Ledger done = mine(st, m, {settle.value()}, cfg);
        CHECK(done.meta_of(m) == 30);
        // 100 spare after the open, minus three 1-unit sends, plus the refund.
        CHECK(done.meta_of(s) == 100 - 3 + 70);
        CHECK(done.meta_of(derived_address(9)) == 3);
        CHECK(done.meta_of(channel_contract_address()) == 0);
        CHECK(done.channels.at(ch.channel_id).phase == ChannelPhase::ClosedByMiner);

        // Terminal: no refund afterwards.
        CHECK(channel_expire_refund(done.channels.at(ch.channel_id), 1000, done)
                  .error() == ChannelError::ChannelNotOpen);
    }
    SUBCASE("a cooperative sender ack replaces all proofs") {
        SettlementEvidence ev;
        ev.sender_ack = true;
        CHECK(channel_close_by_miner(ch, final_agg, ev, st).ok());
    }
    SUBCASE("missing or damaged proofs are rejected") {
        SettlementEvidence ev;
        for (const auto& id : ch.covered_tx0)
            ev.proofs.push_back(prove_mined(st, id));
        ev.proofs.pop_back();
        CHECK(channel_close_by_miner(ch, final_agg, ev, st).error() ==
              ChannelError::ProofInvalid);

        SettlementEvidence bad;
        for (const auto& id : ch.covered_tx0)
            bad.proofs.push_back(prove_mined(st, id));
        bad.proofs[1].root[0] ^= 1;  // no block carries this root
        CHECK(channel_close_by_miner(ch, final_agg, bad, st).error() ==
              ChannelError::ProofInvalid);
    }
    SUBCASE("claiming more than the collateral never settles") {
        auto greedy = final_agg;
        greedy.cumulative_miner_balance = 101;
        SettlementEvidence ev;
        ev.sender_ack = true;
        CHECK(channel_close_by_miner(ch, greedy, ev, st).error() ==
              ChannelError::ProofInvalid);
    }
}

TEST_CASE("channel: fees proven against another miner's block do not settle") {
    const Address s = derived_address(1);
    const Address m1 = derived_address(100), m2 = derived_address(101);
    SimConfig cfg;
    Ledger st;
    st.balances_meta[s] = 200;

    auto opened = channel_open(s, m1, 100, 50, st).value();
    Channel ch = opened.first;
    st = mine(st, m1, {opened.second}, cfg);

    Transaction tx0;
    tx0.sender = s;
    tx0.nonce = st.nonce_of(s);
    tx0.payload = PayloadKind::Noop;
    auto agg = channel_pay(ch, 10, tx0).value();
    st = mine(st, m2, {tx0}, cfg);  // the rival mined it
    ch = commit_payment(ch, agg).value();

    AggregationTx final_agg;
    final_agg.channel_id = ch.channel_id;
    final_agg.index = ch.seq;
    final_agg.cumulative_miner_balance = ch.miner_balance;
    final_agg.referenced_tx0 = ch.covered_tx0;
    SettlementEvidence ev;
    ev.proofs.push_back(prove_mined(st, ch.covered_tx0[0]));
    CHECK(channel_close_by_miner(ch, final_agg, ev, st).error() ==
          ChannelError::WrongMinerForProvenBlock);
}

TEST_CASE("channel: timeout refund boundary is strict") {
    const Address s = derived_address(1), m = derived_address(100);
    SimConfig cfg;
    cfg.channel_timeout_blocks = 5;
    Ledger st;
    st.balances_meta[s] = 100;

    auto opened = channel_open(s, m, 60, cfg.channel_timeout_blocks, st).value();
    Channel ch = opened.first;
    st = mine(st, m, {opened.second}, cfg);
    CHECK(ch.timeout_at == 5);

    st = mine_empty(st, m, 4, cfg);  // height now 5 == timeout_at
    CHECK(channel_expire_refund(ch, st.height(), st).error() ==
          ChannelError::NotYetExpired);

    // Refund transactions are also rejected on chain at the boundary.
    Transaction early;
    early.sender = s;
    early.receiver = channel_contract_address();
    early.amount = 60;
    early.nonce = st.nonce_of(s);
    early.payload = PayloadKind::ChannelRefund;
    early.memo = chain::encode_channel_ref(ch.channel_id);
    CHECK(chain::apply_tx(st, early, m, st.height(), {}).error() ==
          chain::BlockError::InvalidChannelOp);

    st = mine_empty(st, m, 1, cfg);  // height 6 > timeout_at
    auto refund = channel_expire_refund(ch, st.height(), st);
    REQUIRE(refund.ok());
    Ledger done = mine(st, m, {refund.value()}, cfg);
    CHECK(done.meta_of(s) == 100);  // every unit came home
    CHECK(done.meta_of(channel_contract_address()) == 0);
    CHECK(done.channels.at(ch.channel_id).phase ==
          ChannelPhase::RefundedAfterTimeout);
}

TEST_CASE("channel: housekeeping inclusion policy by miner") {
    const Address s = derived_address(1);
    const Address m1 = derived_address(100), m2 = derived_address(101);
    SimConfig cfg;
    MinerProfile p1{m1, 0.5, true}, p2{m2, 0.5, true};
    Ledger st;
    st.balances_meta[s] = 100;

    auto opened = channel_open(s, m1, 50, 5, st).value();
    const Transaction& open_tx = opened.second;

    // Opens name their miner; nobody else bothers.
    CHECK(chain::build_block({open_tx}, p2, st, cfg).txs.empty());
    Block b1 = chain::build_block({open_tx}, p1, st, cfg);
    REQUIRE(b1.txs.size() == 1);
    st = chain::apply_block(st, b1, cfg).value();
    Channel ch = opened.first;

    // Settlements are the channel miner's own business.
    Transaction tx0;
    tx0.sender = s;
    tx0.nonce = st.nonce_of(s);
    tx0.payload = PayloadKind::Noop;
    auto agg = channel_pay(ch, 10, tx0).value();
    st = mine(st, m1, {tx0}, cfg);
    ch = commit_payment(ch, agg).value();
    AggregationTx fin;
    fin.channel_id = ch.channel_id;
    fin.index = ch.seq;
    fin.cumulative_miner_balance = ch.miner_balance;
    fin.referenced_tx0 = ch.covered_tx0;
    SettlementEvidence ev;
    ev.sender_ack = true;
    Transaction settle = channel_close_by_miner(ch, fin, ev, st).value();
    CHECK(chain::build_block({settle}, p2, st, cfg).txs.empty());
    CHECK(chain::build_block({settle}, p1, st, cfg).txs.size() == 1);

    // Refunds, by contrast, any miner will take.
    st = mine_empty(st, m2, 4, cfg);  // past the timeout at height 5
    auto refund = channel_expire_refund(ch, st.height(), st).value();
    CHECK(chain::build_block({refund}, p2, st, cfg).txs.size() == 1);
    CHECK(chain::build_block({refund}, p1, st, cfg).txs.size() == 1);
}
