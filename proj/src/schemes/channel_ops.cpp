#include "metasim/schemes/channel_ops.hpp"

#include <map>

namespace metasim::schemes {

Result<std::pair<Channel, Transaction>, ChannelError> channel_open(
    const Address& sender, const Address& miner, std::uint64_t collateral,
    std::uint64_t timeout_blocks, const chain::Ledger& ledger) {
    if (collateral == 0 || ledger.meta_of(sender) < collateral)
        return ChannelError::InsufficientCollateral;

    const std::uint64_t nonce = ledger.nonce_of(sender);
    const std::uint64_t timeout_at = ledger.height() + timeout_blocks;

    Channel ch;
    ch.channel_id = channel_id_for(sender, miner, nonce);
    ch.sender = sender;
    ch.miner = miner;
    ch.collateral = collateral;
    ch.sender_balance = collateral;
    ch.timeout_at = timeout_at;
    ch.phase = ChannelPhase::Open;

    Transaction open;
    open.sender = sender;
    open.receiver = channel_contract_address();
    open.amount = collateral;
    open.nonce = nonce;
    open.payload = PayloadKind::ChannelOpen;
    open.memo = chain::encode_open_memo({ch.channel_id, miner, timeout_at});
    return std::pair{std::move(ch), std::move(open)};
}

Result<AggregationTx, ChannelError> channel_pay(const Channel& ch,
                                                std::uint64_t fee,
                                                const Transaction& tx0) {
    if (ch.phase != ChannelPhase::Open) return ChannelError::ChannelNotOpen;
    if (fee == 0) return ChannelError::ZeroFee;
    if (ch.sender_balance < fee) return ChannelError::ChannelDepleted;

    AggregationTx agg;
    agg.channel_id = ch.channel_id;
    agg.index = ch.seq + 1;
    agg.cumulative_miner_balance = ch.miner_balance + fee;
    agg.referenced_tx0 = ch.covered_tx0;
    agg.referenced_tx0.push_back(tx_id(tx0));
    return agg;
}

Result<Channel, ChannelError> commit_payment(const Channel& ch,
                                             const AggregationTx& agg) {
    if (agg.channel_id != ch.channel_id) return ChannelError::WrongChannel;
    if (ch.phase != ChannelPhase::Open) return ChannelError::ChannelNotOpen;
    if (agg.index != ch.seq + 1) return ChannelError::StaleAggregation;
    if (agg.cumulative_miner_balance <= ch.miner_balance)
        return ChannelError::StaleAggregation;
    if (agg.cumulative_miner_balance > ch.collateral)
        return ChannelError::ChannelDepleted;
    if (agg.referenced_tx0.size() != agg.index) return ChannelError::ProofInvalid;

    Channel next = ch;
    next.seq = agg.index;
    next.miner_balance = agg.cumulative_miner_balance;
    next.sender_balance = ch.collateral - agg.cumulative_miner_balance;
    next.covered_tx0 = agg.referenced_tx0;
    return next;
}

std::vector<Transaction> miner_policy_channel(
    const std::vector<Transaction>& mempool, const std::vector<Channel>& channels,
    const std::vector<AggregationTx>& pending_aggs) {
    // The miner includes a zero-fee transaction only when its fee is already
    // promised to it: a signed next-index update on one of its open channels
    // that extends the channel's history and covers exactly that transaction.
    std::map<Hash32, const Channel*> by_id;
    for (const auto& ch : channels) by_id.emplace(ch.channel_id, &ch);

    std::set<TxId> secured;
    for (const auto& agg : pending_aggs) {
        auto it = by_id.find(agg.channel_id);
        if (it == by_id.end()) continue;
        const Channel& ch = *it->second;
        if (ch.phase != ChannelPhase::Open) continue;
        if (!agg.sender_signature_present) continue;
        if (agg.index != ch.seq + 1) continue;
        if (agg.cumulative_miner_balance <= ch.miner_balance) continue;
        if (agg.cumulative_miner_balance > ch.collateral) continue;
        if (agg.referenced_tx0.size() != agg.index) continue;
        if (!std::equal(ch.covered_tx0.begin(), ch.covered_tx0.end(),
                        agg.referenced_tx0.begin()))
            continue;
        secured.insert(agg.referenced_tx0.back());
    }

    std::vector<Transaction> picked;
    for (const auto& tx : mempool) {
        if (tx.fee_native != 0 || tx.fee_meta != 0) continue;
        if (secured.count(tx_id(tx))) picked.push_back(tx);
    }
    return picked;
}

Result<Transaction, ChannelError> channel_close_by_miner(
    const Channel& ch, const AggregationTx& final_agg,
    const SettlementEvidence& evidence, const chain::Ledger& ledger) {
    if (ch.phase != ChannelPhase::Open) return ChannelError::ChannelNotOpen;
    if (final_agg.channel_id != ch.channel_id) return ChannelError::WrongChannel;
    if (final_agg.index < ch.seq) return ChannelError::StaleAggregation;
    if (final_agg.index == 0) return ChannelError::ProofInvalid;
    if (!final_agg.sender_signature_present) return ChannelError::ProofInvalid;
    if (final_agg.cumulative_miner_balance > ch.collateral)
        return ChannelError::ProofInvalid;
    if (final_agg.referenced_tx0.size() != final_agg.index)
        return ChannelError::ProofInvalid;

    if (!evidence.sender_ack) {
        // One inclusion proof per covered transaction, each anchored in a
        // block this miner mined. A proof against someone else's block means
        // the fee was never this channel's to settle.
        if (evidence.proofs.size() != final_agg.referenced_tx0.size())
            return ChannelError::ProofInvalid;

        std::map<Hash32, const chain::Block*> by_root;
        for (const auto& b : ledger.chain) by_root.emplace(b.merkle_root, &b);

        for (std::size_t i = 0; i < evidence.proofs.size(); ++i) {
            const auto& proof = evidence.proofs[i];
            if (proof.leaf != chain::merkle_leaf(final_agg.referenced_tx0[i]))
                return ChannelError::ProofInvalid;
            if (!chain::merkle_verify(proof)) return ChannelError::ProofInvalid;
            auto it = by_root.find(proof.root);
            if (it == by_root.end()) return ChannelError::ProofInvalid;
            if (it->second->miner_id != ch.miner)
                return ChannelError::WrongMinerForProvenBlock;
        }
    }

    Transaction settle;
    settle.sender = ch.miner;
    settle.receiver = channel_contract_address();
    settle.amount = final_agg.cumulative_miner_balance;
    settle.nonce = ledger.nonce_of(ch.miner);
    settle.payload = PayloadKind::ChannelSettle;
    settle.memo = chain::encode_channel_ref(ch.channel_id);
    return settle;
}

Result<Transaction, ChannelError> channel_expire_refund(
    const Channel& ch, std::uint64_t current_height, const chain::Ledger& ledger) {
    if (ch.phase != ChannelPhase::Open) return ChannelError::ChannelNotOpen;
    if (current_height <= ch.timeout_at) return ChannelError::NotYetExpired;

    Transaction refund;
    refund.sender = ch.sender;
    refund.receiver = channel_contract_address();
    refund.amount = ch.collateral;
    refund.nonce = ledger.nonce_of(ch.sender);
    refund.payload = PayloadKind::ChannelRefund;
    refund.memo = chain::encode_channel_ref(ch.channel_id);
    return refund;
}

}  // namespace metasim::schemes
