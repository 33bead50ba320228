#pragma once

#include <utility>
#include <vector>

#include "metasim/channel.hpp"
#include "metasim/ledger.hpp"
#include "metasim/merkle.hpp"
#include "metasim/result.hpp"

namespace metasim::schemes {

enum class ChannelError {
    InsufficientCollateral,
    ChannelNotOpen,
    ChannelDepleted,
    ZeroFee,
    StaleAggregation,
    ProofInvalid,
    WrongMinerForProvenBlock,
    NotYetExpired,
    WrongChannel,
};

// Opens a fee channel to one miner: returns the off-chain channel state plus
// the on-chain transaction that escrows `collateral` meta units. Zero-value
// channels are rejected outright.
Result<std::pair<Channel, Transaction>, ChannelError> channel_open(
    const Address& sender, const Address& miner, std::uint64_t collateral,
    std::uint64_t timeout_blocks, const chain::Ledger& ledger);

// The sender's i-th off-chain payment: extends the cumulative balance by
// `fee` and covers `tx0`. The returned update only becomes final for the
// miner once tx0 is mined by that miner; commit_payment records that.
Result<AggregationTx, ChannelError> channel_pay(const Channel& ch,
                                                std::uint64_t fee,
                                                const Transaction& tx0);

// Advances the channel to the state promised by `agg`. Call after the miner
// mined the covered transaction; a skipped or replayed index is rejected.
Result<Channel, ChannelError> commit_payment(const Channel& ch,
                                             const AggregationTx& agg);

// Inclusion policy for a channel miner: from `mempool`, picks exactly the
// zero-fee transactions whose fee is secured by a fresh balance update on one
// of `channels` (all channels of the calling miner). Updates for other
// miners' channels are worthless here and ignored.
std::vector<Transaction> miner_policy_channel(
    const std::vector<Transaction>& mempool, const std::vector<Channel>& channels,
    const std::vector<AggregationTx>& pending_aggs);

// Evidence that every covered transaction was really mined by the channel's
// miner: either the sender's signed acknowledgment, or one inclusion proof
// per covered id checked against the stored block roots.
struct SettlementEvidence {
    bool sender_ack = false;
    std::vector<chain::MerkleProof> proofs;  // aligned with referenced_tx0
};

// Miner-side close: validates the final balance update and the evidence,
// then returns the on-chain settlement transaction paying the miner its
// cumulative balance (the escrow remainder flows back to the sender when the
// settlement is applied). Close is terminal — no reopening or partial close.
Result<Transaction, ChannelError> channel_close_by_miner(
    const Channel& ch, const AggregationTx& final_agg,
    const SettlementEvidence& evidence, const chain::Ledger& ledger);

// Sender-side escape hatch: strictly after the timeout height, reclaim the
// full collateral of a channel the miner never closed.
Result<Transaction, ChannelError> channel_expire_refund(
    const Channel& ch, std::uint64_t current_height, const chain::Ledger& ledger);

}  // namespace metasim::schemes
