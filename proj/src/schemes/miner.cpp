#include "metasim/schemes/miner.hpp"

#include <cassert>

namespace metasim::schemes {

namespace {

std::uint64_t meta_spend_of(const ActionSpec& a) {
    return a.payload == PayloadKind::TransferMeta ? a.amount : 0;
}

Transaction make_tx0(const Address& sender, const ActionSpec& action,
                     std::uint64_t nonce) {
    Transaction tx0;
    tx0.sender = sender;
    tx0.receiver = action.target;
    tx0.amount = action.amount;
    tx0.nonce = nonce;
    tx0.payload = action.payload;
    return tx0;
}

Transaction make_fee_follower(const Address& sender, const TxId& last_tx0,
                              std::uint64_t meta_fee, bool direct_to_miner,
                              std::uint64_t nonce) {
    Transaction tx1;
    tx1.sender = sender;
    tx1.receiver =
        direct_to_miner ? current_miner_sentinel() : anyone_can_spend_address();
    tx1.fee_meta = meta_fee;
    tx1.delta = last_tx0;
    tx1.nonce = nonce;
    tx1.payload = PayloadKind::Noop;
    return tx1;
}

}  // namespace

Result<Metatransaction, MinerSchemeError> miner_metatx_issue(
    const Address& sender, const ActionSpec& action, std::uint64_t meta_fee,
    bool direct_to_miner, const chain::Ledger& ledger) {
    if (ledger.meta_of(sender) < meta_fee + meta_spend_of(action))
        return MinerSchemeError::InsufficientMetaBalance;

    const std::uint64_t n = ledger.nonce_of(sender);
    Metatransaction m;
    m.tx0 = make_tx0(sender, action, n);
    m.tx1 = make_fee_follower(sender, tx_id(*m.tx0), meta_fee, direct_to_miner, n + 1);
    assert(validate_metatx(m).ok());
    return m;
}

Result<std::pair<std::vector<Transaction>, Transaction>, MinerSchemeError>
miner_metatx_batch(const Address& sender, const std::vector<ActionSpec>& actions,
                   std::uint64_t meta_fee, bool direct_to_miner,
                   const chain::Ledger& ledger, const chain::SimConfig& cfg) {
    if (actions.empty()) return MinerSchemeError::EmptyBatch;

    // The batch only ever mines as one indivisible chunk, so it must fit in
    // a single block alongside its fee follower.
    const std::uint64_t total_gas = (actions.size() + 1) * cfg.base_tx_gas;
    if (total_gas > cfg.block_gas_limit)
        return MinerSchemeError::BatchExceedsBlockCapacity;

    std::uint64_t meta_needed = meta_fee;
    for (const auto& a : actions) meta_needed += meta_spend_of(a);
    if (ledger.meta_of(sender) < meta_needed)
        return MinerSchemeError::InsufficientMetaBalance;

    std::uint64_t n = ledger.nonce_of(sender);
    std::vector<Transaction> tx0s;
    tx0s.reserve(actions.size());
    for (const auto& a : actions) tx0s.push_back(make_tx0(sender, a, n++));

    Transaction tx1 =
        make_fee_follower(sender, tx_id(tx0s.back()), meta_fee, direct_to_miner, n);
    return std::pair{std::move(tx0s), std::move(tx1)};
}

}  // namespace metasim::schemes
