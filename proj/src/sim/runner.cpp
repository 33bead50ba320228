#include "metasim/sim/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "json.hpp"
#include "metasim/block_builder.hpp"
#include "metasim/econ.hpp"
#include "metasim/merkle.hpp"
#include "metasim/schemes/channel_ops.hpp"
#include "metasim/schemes/miner.hpp"
#include "metasim/schemes/relayer.hpp"

namespace metasim::sim {

namespace {

using nlohmann::ordered_json;

std::string short_hex(const Hash32& h) { return to_hex(h).substr(0, 16); }

const char* payload_name(PayloadKind p) {
    switch (p) {
        case PayloadKind::TransferNative: return "transfer_native";
        case PayloadKind::TransferMeta: return "transfer_meta";
        case PayloadKind::Noop: return "noop";
        case PayloadKind::ChannelOpen: return "channel_open";
        case PayloadKind::ChannelSettle: return "channel_settle";
        case PayloadKind::ChannelRefund: return "channel_refund";
        case PayloadKind::ClaimAnyoneCanSpend: return "claim_anyone_can_spend";
    }
    return "?";
}

// Off-chain view of one channel plus the at-most-one outstanding balance
// update (the pending-payment discipline keeps it single).
struct ChannelSession {
    Channel state;
    std::optional<AggregationTx> offer;
};

struct SenderRt {
    std::uint64_t issued = 0;
    // channel-scheme bookkeeping
    std::uint64_t opens_submitted = 0;
    std::vector<Hash32> channel_order;
    std::map<Hash32, ChannelSession> sessions;
    std::uint64_t payments_mined = 0;
    std::optional<TxId> outstanding_tx0;
    std::set<Hash32> settle_requested;
    std::set<Hash32> refund_requested;
};

struct EventRow {
    std::uint64_t tick;
    std::string channel;
    std::string event;
    std::uint64_t value;
};

}  // namespace

Result<RunSummary, RunFailure> run_scenario(const Scenario& scenario,
                                            const std::string& out_dir) {
    namespace fs = std::filesystem;

    const chain::SimConfig cfg = scenario.sim;
    Rng rng(cfg.seed);

    std::vector<chain::MinerProfile> miners = scenario.miners;
    if (scenario.sampled) {
        miners = econ::sample_pool_distribution(scenario.sampled->count,
                                                scenario.sampled->lambda, rng);
        for (auto& m : miners) m.accepts_meta_fees = scenario.sampled->accepts_meta_fees;
    }
    std::vector<chain::MinerProfile> by_share = miners;
    std::stable_sort(by_share.begin(), by_share.end(),
                     [](const auto& a, const auto& b) {
                         return a.hash_share > b.hash_share;
                     });
    std::map<Address, chain::MinerProfile> profile_of;
    for (const auto& m : miners) profile_of[m.miner_id] = m;

    chain::Ledger ledger;
    for (const auto& [addr, amt] : scenario.funding.native)
        ledger.balances_native[addr] += amt;
    for (const auto& [addr, amt] : scenario.funding.meta)
        ledger.balances_meta[addr] += amt;
    const chain::Ledger genesis = ledger;

    std::vector<Transaction> mempool;
    std::map<Address, std::uint64_t> outstanding;  // unmined emitted txs per signer
    auto emit = [&](const Transaction& tx) {
        mempool.push_back(tx);
        ++outstanding[tx.sender];
    };
    auto free_signer = [&](const Address& a) {
        auto it = outstanding.find(a);
        return it == outstanding.end() || it->second == 0;
    };

    std::vector<SenderRt> rt(scenario.senders.size());
    std::vector<EventRow> events;
    std::set<TxId> action_ids;
    std::set<TxId> mined_actions;

    RunSummary sum;
    sum.ticks = scenario.ticks;
    bool conservation_ok = true;

    // Artifacts are buffered and written only after the run completes, so a
    // failed run leaves no partial output behind.
    std::vector<ordered_json> chain_lines;
    std::vector<std::string> block_rows;

    for (std::uint64_t tick = 1; tick <= scenario.ticks; ++tick) {
        // --- sender behaviors, in config order, at most one emission each
        for (std::size_t si = 0; si < scenario.senders.size(); ++si) {
            const SenderSpec& spec = scenario.senders[si];
            SenderRt& r = rt[si];

            if (const auto* b = std::get_if<RelayerBehavior>(&spec.behavior)) {
                if (r.issued >= b->count) continue;
                if ((tick - 1) % b->every_n_ticks != 0) continue;
                const Address fee_payer = b->fee_payer == schemes::FeePayer::Sender
                                              ? spec.address
                                              : b->target;
                if (!free_signer(b->relayer) || !free_signer(fee_payer)) continue;

                schemes::RelayerRequest req;
                req.sender = spec.address;
                req.target = b->target;
                req.action = PayloadKind::Noop;
                req.meta_fee_offered = b->meta_fee_offered;
                req.fee_payer = b->fee_payer;
                auto res = schemes::relayer_submit(req, b->relayer, b->honest, ledger,
                                                   b->relayer_fee_native);
                if (!res) continue;  // underfunded this tick; retry later
                ++sum.actions_requested;
                ++r.issued;
                if (res.value()) {
                    const auto& [action, reimburse] = *res.value();
                    action_ids.insert(tx_id(action));
                    emit(action);
                    emit(reimburse);
                }
            } else if (const auto* b = std::get_if<MinerSchemeBehavior>(&spec.behavior)) {
                if (r.issued >= b->count) continue;
                if ((tick - 1) % b->every_n_ticks != 0) continue;
                if (!free_signer(spec.address)) continue;

                schemes::ActionSpec action;
                action.target = b->target;
                action.amount = b->amount;
                action.payload =
                    b->amount > 0 ? PayloadKind::TransferMeta : PayloadKind::Noop;
                std::vector<schemes::ActionSpec> actions(b->batch, action);
                auto res = schemes::miner_metatx_batch(spec.address, actions,
                                                       b->meta_fee, b->direct_to_miner,
                                                       ledger, cfg);
                if (!res) continue;
                ++r.issued;
                sum.actions_requested += b->batch;
                for (const auto& tx0 : res.value().first) {
                    action_ids.insert(tx_id(tx0));
                    emit(tx0);
                }
                emit(res.value().second);
            } else if (const auto* b = std::get_if<ChannelBehavior>(&spec.behavior)) {
                const std::uint64_t want =
                    std::min<std::uint64_t>(b->channels_top_n, by_share.size());

                if (r.opens_submitted < want) {
                    if (!free_signer(spec.address)) continue;
                    const Address target_miner = by_share[r.opens_submitted].miner_id;
                    const std::uint64_t collateral =
                        b->collateral ? b->collateral : b->payments * b->fee;
                    auto res = schemes::channel_open(spec.address, target_miner,
                                                     collateral,
                                                     cfg.channel_timeout_blocks, ledger);
                    if (!res) continue;
                    auto& [ch, open_tx] = res.value();
                    r.channel_order.push_back(ch.channel_id);
                    r.sessions.emplace(ch.channel_id, ChannelSession{ch, std::nullopt});
                    emit(open_tx);
                    ++r.opens_submitted;
                    events.push_back({tick, short_hex(ch.channel_id), "open_submitted",
                                      collateral});
                    continue;
                }

                bool all_opened = true;
                for (const auto& [id, s] : r.sessions)
                    if (s.state.opened_at == 0 &&
                        s.state.phase == ChannelPhase::Open)
                        all_opened = false;
                if (!all_opened) continue;

                const bool close_now =
                    (b->close_at_tick > 0 && tick >= b->close_at_tick) ||
                    (r.issued >= b->payments && r.payments_mined >= r.issued);

                if (r.issued < b->payments && !r.outstanding_tx0 &&
                    (b->close_at_tick == 0 || tick < b->close_at_tick) &&
                    free_signer(spec.address)) {
                    Transaction tx0;
                    tx0.sender = spec.address;
                    tx0.receiver = b->target;
                    tx0.amount = b->amount;
                    tx0.nonce = ledger.nonce_of(spec.address);
                    tx0.payload =
                        b->amount > 0 ? PayloadKind::TransferMeta : PayloadKind::Noop;

                    // Offer the same update on every open channel; only the
                    // channel of whichever miner actually mines tx0 commits.
                    bool offered = false;
                    for (const auto& id : r.channel_order) {
                        auto& s = r.sessions.at(id);
                        auto agg = schemes::channel_pay(s.state, b->fee, tx0);
                        if (!agg) continue;
                        s.offer = agg.value();
                        events.push_back({tick, short_hex(id), "offer",
                                          agg.value().cumulative_miner_balance});
                        offered = true;
                    }
                    if (offered) {
                        const TxId id0 = tx_id(tx0);
                        action_ids.insert(id0);
                        r.outstanding_tx0 = id0;
                        emit(tx0);
                        ++r.issued;
                        ++sum.actions_requested;
                    }
                    continue;
                }

                if (close_now &&
                    b->close_mode != ChannelBehavior::CloseMode::Expire) {
                    bool acted = false;
                    for (const auto& id : r.channel_order) {
                        auto& s = r.sessions.at(id);
                        if (s.state.phase != ChannelPhase::Open) continue;
                        if (s.state.miner_balance == 0) continue;  // expires instead
                        if (r.settle_requested.count(id)) continue;
                        if (!free_signer(s.state.miner)) continue;

                        AggregationTx final_agg;
                        final_agg.channel_id = id;
                        final_agg.index = s.state.seq;
                        final_agg.cumulative_miner_balance = s.state.miner_balance;
                        final_agg.referenced_tx0 = s.state.covered_tx0;

                        schemes::SettlementEvidence ev;
                        if (b->close_mode == ChannelBehavior::CloseMode::Ack) {
                            ev.sender_ack = true;
                        } else {
                            for (const auto& covered : s.state.covered_tx0) {
                                const auto& at = ledger.mined_index.at(covered);
                                const chain::Block& blk = ledger.chain[at.height - 1];
                                std::vector<TxId> ids;
                                ids.reserve(blk.txs.size());
                                std::size_t pos = 0;
                                for (std::size_t i = 0; i < blk.txs.size(); ++i) {
                                    ids.push_back(tx_id(blk.txs[i]));
                                    if (ids.back() == covered) pos = i;
                                }
                                ev.proofs.push_back(
                                    chain::merkle_prove(ids, pos).value());
                            }
                        }
                        auto settle = schemes::channel_close_by_miner(
                            s.state, final_agg, ev, ledger);
                        if (!settle) continue;
                        emit(settle.value());
                        r.settle_requested.insert(id);
                        events.push_back({tick, short_hex(id), "close_submitted",
                                          s.state.miner_balance});
                        acted = true;
                        break;  // one settlement per tick
                    }
                    if (acted) continue;
                }

                // Escape hatch for channels the miner never settles.
                for (const auto& id : r.channel_order) {
                    auto& s = r.sessions.at(id);
                    if (s.state.phase != ChannelPhase::Open) continue;
                    if (ledger.height() <= s.state.timeout_at) continue;
                    if (r.refund_requested.count(id)) continue;
                    if (r.settle_requested.count(id)) continue;
                    if (!free_signer(spec.address)) break;
                    auto refund = schemes::channel_expire_refund(
                        s.state, ledger.height(), ledger);
                    if (!refund) continue;
                    emit(refund.value());
                    r.refund_requested.insert(id);
                    events.push_back({tick, short_hex(id), "refund_submitted",
                                      s.state.collateral});
                    break;
                }
            }
        }

        // --- elect, assemble the candidate pool, build and apply the block
        auto elected = chain::elect_miner(miners, rng);
        if (!elected)
            return RunFailure{RunFailure::Kind::InvariantViolation, "no miners"};
        const chain::MinerProfile& miner = profile_of.at(elected.value());

        std::vector<Transaction> pool = mempool;
        if (ledger.meta_of(anyone_can_spend_address()) > 0) {
            auto claim = chain::claim_anyone_can_spend(ledger, miner.miner_id);
            if (claim) pool.push_back(claim.value());
        }

        chain::MinerView view;
        {
            std::vector<Channel> my_channels;
            std::vector<AggregationTx> my_aggs;
            for (const auto& r : rt) {
                for (const auto& [id, s] : r.sessions) {
                    if (s.state.miner != miner.miner_id) continue;
                    my_channels.push_back(s.state);
                    if (s.offer) my_aggs.push_back(*s.offer);
                }
            }
            for (const auto& tx :
                 schemes::miner_policy_channel(pool, my_channels, my_aggs))
                view.channel_secured.insert(tx_id(tx));
        }

        const chain::Block block = chain::build_block(pool, miner, ledger, cfg, view);
        auto applied = chain::apply_block(ledger, block, cfg);
        if (!applied)
            return RunFailure{RunFailure::Kind::InvariantViolation,
                              "built block failed to apply"};
        ledger = std::move(applied.value());

        // --- post-block bookkeeping
        std::set<TxId> mined_now;
        for (const auto& tx : block.txs) mined_now.insert(tx_id(tx));

        {
            std::vector<Transaction> rest;
            rest.reserve(mempool.size());
            for (const auto& tx : mempool) {
                if (mined_now.count(tx_id(tx))) {
                    --outstanding[tx.sender];
                } else {
                    rest.push_back(tx);
                }
            }
            mempool = std::move(rest);
        }
        for (const auto& id : mined_now)
            if (action_ids.count(id)) mined_actions.insert(id);

        for (std::size_t si = 0; si < scenario.senders.size(); ++si) {
            SenderRt& r = rt[si];
            if (r.outstanding_tx0 && mined_now.count(*r.outstanding_tx0)) {
                ++r.payments_mined;
                for (const auto& id : r.channel_order) {
                    auto& s = r.sessions.at(id);
                    if (!s.offer) continue;
                    if (s.offer->referenced_tx0.back() != *r.outstanding_tx0) continue;
                    if (s.state.miner == block.miner_id) {
                        auto next = schemes::commit_payment(s.state, *s.offer);
                        if (next) {
                            s.state = next.value();
                            events.push_back({tick, short_hex(id), "commit",
                                              s.state.miner_balance});
                        }
                    }
                    s.offer.reset();  // competing offers die with the race
                }
                r.outstanding_tx0.reset();
            }
            for (const auto& id : r.channel_order) {
                auto& s = r.sessions.at(id);
                auto lc = ledger.channels.find(id);
                if (lc == ledger.channels.end()) continue;
                if (s.state.opened_at == 0) {
                    s.state.opened_at = lc->second.opened_at;
                    ++sum.channels_opened;
                    events.push_back({tick, short_hex(id), "opened",
                                      s.state.collateral});
                }
                if (lc->second.phase != s.state.phase) {
                    if (lc->second.phase == ChannelPhase::ClosedByMiner) {
                        ++sum.channels_settled;
                        sum.settled_to_miners_total += lc->second.miner_balance;
                        events.push_back({tick, short_hex(id), "closed",
                                          lc->second.miner_balance});
                    } else if (lc->second.phase == ChannelPhase::RefundedAfterTimeout) {
                        ++sum.channels_refunded;
                        sum.refunded_to_senders_total += lc->second.collateral;
                        events.push_back({tick, short_hex(id), "refunded",
                                          lc->second.collateral});
                    }
                    s.state.phase = lc->second.phase;
                }
            }
        }

        std::uint64_t fees_native = 0, fees_meta = 0;
        for (const auto& tx : block.txs) {
            fees_native += tx.fee_native;
            fees_meta += tx.fee_meta;
        }
        sum.total_fees_native += fees_native;
        sum.total_fees_meta += fees_meta;
        sum.txs_mined += block.txs.size();

        if (!chain::supplies_consistent(genesis, ledger, cfg)) conservation_ok = false;

        ordered_json line;
        line["height"] = block.height;
        line["parent"] = to_hex(block.parent);
        line["miner"] = short_hex(block.miner_id.id);
        line["merkle_root"] = to_hex(block.merkle_root);
        line["gas_used"] = block.gas_used;
        ordered_json txs = ordered_json::array();
        for (const auto& tx : block.txs) {
            ordered_json t;
            t["id"] = short_hex(tx_id(tx).digest);
            t["sender"] = short_hex(tx.sender.id);
            t["payload"] = payload_name(tx.payload);
            t["nonce"] = tx.nonce;
            t["amount"] = tx.amount;
            t["fee_native"] = tx.fee_native;
            t["fee_meta"] = tx.fee_meta;
            txs.push_back(t);
        }
        line["txs"] = txs;
        chain_lines.push_back(line);

        block_rows.push_back(
            std::to_string(block.height) + "," + short_hex(block.miner_id.id) + "," +
            std::to_string(block.txs.size()) + "," + std::to_string(block.gas_used) +
            "," + std::to_string(fees_native) + "," + std::to_string(fees_meta) + "," +
            std::to_string(ledger.total_native()) + "," +
            std::to_string(ledger.total_meta()));
    }

    sum.blocks = ledger.chain.size();
    for (const auto& b : ledger.chain)
        for (const auto& tx : b.txs)
            if (is_meta_fee_follower(tx)) ++sum.fee_follower_pairs_mined;
    sum.actions_mined = mined_actions.size();
    sum.atomicity_violations = chain::count_unpaired_fee_followers(ledger.chain);
    sum.conservation_ok = conservation_ok;

    // --- write artifacts
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        return RunFailure{RunFailure::Kind::Io,
                          "cannot create output directory: " + out_dir};

    auto open_out = [&](const char* name) {
        return std::ofstream(fs::path(out_dir) / name, std::ios::trunc);
    };

    {
        auto f = open_out("chain.jsonl");
        if (!f) return RunFailure{RunFailure::Kind::Io, "cannot write chain.jsonl"};
        for (const auto& line : chain_lines) f << line.dump() << "\n";
    }
    {
        auto f = open_out("blocks.csv");
        f << "height,miner,tx_count,gas_used,fees_native,fees_meta,native_supply,meta_supply\n";
        for (const auto& row : block_rows) f << row << "\n";
    }
    {
        auto f = open_out("channel_events.csv");
        f << "tick,channel,event,value\n";
        for (const auto& e : events)
            f << e.tick << "," << e.channel << "," << e.event << "," << e.value << "\n";
    }
    {
        ordered_json s;
        s["name"] = scenario.name;
        s["seed"] = cfg.seed;
        s["ticks"] = sum.ticks;
        s["blocks"] = sum.blocks;
        s["txs_mined"] = sum.txs_mined;
        s["fee_follower_pairs_mined"] = sum.fee_follower_pairs_mined;
        s["actions_requested"] = sum.actions_requested;
        s["actions_mined"] = sum.actions_mined;
        s["atomicity_violations"] = sum.atomicity_violations;
        s["atomicity_ok"] = (sum.atomicity_violations == 0);
        s["conservation_ok"] = sum.conservation_ok;
        ordered_json ch;
        ch["opened"] = sum.channels_opened;
        ch["settled"] = sum.channels_settled;
        ch["refunded"] = sum.channels_refunded;
        ch["settled_to_miners_total"] = sum.settled_to_miners_total;
        ch["refunded_to_senders_total"] = sum.refunded_to_senders_total;
        s["channels"] = ch;
        ordered_json fees;
        fees["native_total"] = sum.total_fees_native;
        fees["meta_total"] = sum.total_fees_meta;
        s["fees"] = fees;
        auto f = open_out("summary.json");
        f << s.dump(2) << "\n";
    }
    {
        ordered_json m;
        m["name"] = scenario.name;
        m["seed"] = cfg.seed;
        m["ticks"] = scenario.ticks;
        m["outputs"] = {"chain.jsonl", "blocks.csv", "channel_events.csv",
                        "summary.json"};
        auto f = open_out("manifest.json");
        f << m.dump(2) << "\n";
    }

    return sum;
}

}  // namespace metasim::sim
