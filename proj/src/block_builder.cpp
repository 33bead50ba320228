#include "metasim/block_builder.hpp"

#include <algorithm>
#include <map>

#include "metasim/merkle.hpp"

namespace metasim::chain {

namespace {

struct Cand {
    const Transaction* tx = nullptr;
    TxId id;
};

struct Unit {
    std::vector<std::size_t> members;  // candidate indices, block order
    std::size_t order_key = 0;         // mempool position used for the fill order
    bool claim = false;                // sweeps go first so they see old balances
};

bool is_housekeeping(PayloadKind p) {
    return p == PayloadKind::ChannelOpen || p == PayloadKind::ChannelSettle ||
           p == PayloadKind::ChannelRefund || p == PayloadKind::ClaimAnyoneCanSpend;
}

// Whether this miner is the right party to include a housekeeping tx: opens
// name their counterparty miner, settles belong to the channel's miner,
// sweeps to the block miner. Refunds are everyone's business — the escape
// hatch must not depend on the counterparty's cooperation.
bool housekeeping_fits_miner(const Transaction& tx, const MinerProfile& miner,
                             const Ledger& ledger) {
    switch (tx.payload) {
        case PayloadKind::ChannelOpen: {
            auto memo = decode_open_memo(tx.memo);
            return memo && memo->miner == miner.miner_id;
        }
        case PayloadKind::ChannelSettle: {
            auto ref = decode_channel_ref(tx.memo);
            if (!ref) return false;
            auto it = ledger.channels.find(*ref);
            return it != ledger.channels.end() && it->second.miner == miner.miner_id;
        }
        case PayloadKind::ChannelRefund:
            return true;
        case PayloadKind::ClaimAnyoneCanSpend:
            return tx.receiver == miner.miner_id ||
                   is_current_miner_sentinel(tx.receiver);
        default:
            return true;
    }
}

}  // namespace

Block build_block(const std::vector<Transaction>& mempool,
                  const MinerProfile& miner, const Ledger& ledger,
                  const SimConfig& cfg, const MinerView& view) {
    // Candidates: drop anything mined already and duplicate ids.
    std::vector<Cand> cand;
    cand.reserve(mempool.size());
    {
        std::set<TxId> seen;
        for (const auto& tx : mempool) {
            TxId id = tx_id(tx);
            if (ledger.mined(id)) continue;
            if (!seen.insert(id).second) continue;
            cand.push_back({&tx, id});
        }
    }

    std::map<TxId, std::size_t> by_id;
    for (std::size_t i = 0; i < cand.size(); ++i) by_id.emplace(cand[i].id, i);

    // Per-sender runs: consecutive nonces starting at the ledger nonce.
    // Anything behind a gap or duplicate nonce cannot be mined this block.
    std::vector<std::pair<Address, std::vector<std::size_t>>> runs;
    {
        std::map<Address, std::vector<std::size_t>> by_sender;
        std::vector<Address> sender_order;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            auto [it, fresh] = by_sender.try_emplace(cand[i].tx->sender);
            if (fresh) sender_order.push_back(cand[i].tx->sender);
            it->second.push_back(i);
        }
        for (const auto& sender : sender_order) {
            auto& idxs = by_sender[sender];
            std::stable_sort(idxs.begin(), idxs.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return cand[a].tx->nonce < cand[b].tx->nonce;
                             });
            std::vector<std::size_t> run;
            std::uint64_t expect = ledger.nonce_of(sender);
            for (std::size_t idx : idxs) {
                if (cand[idx].tx->nonce == expect) {
                    run.push_back(idx);
                    ++expect;
                } else if (cand[idx].tx->nonce < expect) {
                    continue;  // stale or duplicate nonce
                } else {
                    break;  // gap
                }
            }
            if (!run.empty()) runs.emplace_back(sender, std::move(run));
        }
    }

    std::vector<bool> consumed(cand.size(), false);
    std::vector<Unit> units;

    // Cross-sender pairs: a meta-fee follower pinned to another sender's
    // fee-paying transaction (fee delegation through an intermediary). Both
    // halves must be next-in-line for their senders.
    for (std::size_t i = 0; i < cand.size(); ++i) {
        const Transaction& f = *cand[i].tx;
        if (!is_meta_fee_follower(f) || consumed[i]) continue;
        auto it = by_id.find(*f.delta);
        if (it == by_id.end()) continue;
        const std::size_t ti = it->second;
        const Transaction& anchor = *cand[ti].tx;
        if (anchor.sender == f.sender) continue;  // same-sender batches below
        if (anchor.fee_native == 0 || consumed[ti]) continue;
        if (f.nonce != ledger.nonce_of(f.sender)) continue;
        if (anchor.nonce != ledger.nonce_of(anchor.sender)) continue;
        units.push_back(Unit{{ti, i}, std::min(ti, i), false});
        consumed[ti] = consumed[i] = true;
    }

    // Same-sender units: a zero-fee prefix is only shippable once something
    // justifies it — a meta-fee follower capping the batch, or per-tx channel
    // coverage. Any stuck transaction blocks the rest of its sender's run.
    for (const auto& [sender, run] : runs) {
        (void)sender;
        std::vector<std::size_t> pending;
        for (std::size_t idx : run) {
            if (consumed[idx]) {
                if (!pending.empty()) break;
                continue;  // front paired away; the run resumes after it
            }
            const Transaction& t = *cand[idx].tx;
            if (is_meta_fee_follower(t)) {
                if (pending.empty()) break;  // bare follower is unminable
                if (t.delta != cand[pending.back()].id) break;
                if (!miner.accepts_meta_fees) break;
                Unit u;
                u.members = pending;
                u.members.push_back(idx);
                u.order_key = pending.front();
                units.push_back(std::move(u));
                pending.clear();
            } else if (is_housekeeping(t.payload)) {
                if (!pending.empty()) break;
                if (!housekeeping_fits_miner(t, miner, ledger)) break;
                units.push_back(Unit{{idx}, idx,
                                     t.payload == PayloadKind::ClaimAnyoneCanSpend});
            } else if (t.fee_native > 0) {
                if (!pending.empty()) break;
                units.push_back(Unit{{idx}, idx, false});
            } else if (view.channel_secured.count(cand[idx].id)) {
                if (!pending.empty()) break;
                units.push_back(Unit{{idx}, idx, false});
            } else {
                pending.push_back(idx);
            }
        }
        // leftover pending: zero-fee with no justification, dropped
    }

    std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
        if (a.claim != b.claim) return a.claim;
        return a.order_key < b.order_key;
    });

    // Greedy fill with scratch validation: the scratch state mirrors
    // apply_block exactly (coinbase first), so a built block always applies.
    const std::uint64_t height = ledger.height() + 1;
    Ledger scratch = ledger;
    scratch.balances_native[miner.miner_id] += cfg.coinbase_native;

    Block block;
    block.height = height;
    block.parent = ledger.chain.empty() ? zero_hash() : block_hash(ledger.chain.back());
    block.miner_id = miner.miner_id;

    std::set<TxId> included;
    std::vector<TxId> ids;
    std::uint64_t gas_used = 0;

    for (const auto& unit : units) {
        const std::uint64_t unit_gas = unit.members.size() * cfg.base_tx_gas;
        if (gas_used + unit_gas > cfg.block_gas_limit) continue;

        Ledger trial = scratch;
        std::set<TxId> trial_ids = included;
        bool ok = true;
        for (std::size_t m : unit.members) {
            if (!apply_tx(trial, *cand[m].tx, miner.miner_id, height, trial_ids)) {
                ok = false;
                break;
            }
            trial_ids.insert(cand[m].id);
        }
        if (!ok) continue;

        scratch = std::move(trial);
        included = std::move(trial_ids);
        for (std::size_t m : unit.members) {
            block.txs.push_back(*cand[m].tx);
            ids.push_back(cand[m].id);
        }
        gas_used += unit_gas;
    }

    block.merkle_root = merkle_root(ids);
    block.gas_used = gas_used;
    return block;
}

}  // namespace metasim::chain
