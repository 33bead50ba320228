#pragma once

#include <cstdint>
#include <vector>

#include "metasim/tx.hpp"

namespace metasim {

enum class ChannelPhase : std::uint8_t {
    Open = 0,
    ClosedByMiner = 1,
    RefundedAfterTimeout = 2,
};

// Unidirectional fee channel from a sender to one specific miner. The miner's
// balance only ever grows, so no revocation machinery is needed: the miner
// settles by publishing the latest cumulative balance, and the timeout
// protects the sender if the miner never does.
struct Channel {
    Hash32 channel_id{};
    Address sender;
    Address miner;
    std::uint64_t collateral = 0;      // meta currency, escrowed on open
    std::uint64_t sender_balance = 0;  // collateral - miner_balance
    std::uint64_t miner_balance = 0;   // cumulative fees promised so far
    std::uint64_t seq = 0;             // index of the latest committed update
    std::uint64_t opened_at = 0;       // height of the open transaction
    std::uint64_t timeout_at = 0;      // refundable strictly after this height
    ChannelPhase phase = ChannelPhase::Open;

    // Ids of the fee-paying transactions covered by updates 1..seq, in order.
    // Carried on the off-chain copy of the state; the on-chain view (escrow
    // accounting) does not consult it.
    std::vector<TxId> covered_tx0;

    bool operator==(const Channel&) const = default;
};

// Cumulative signed balance update after the i-th off-chain payment. Offered
// by the sender, held by the miner; only the latest one matters at close.
struct AggregationTx {
    Hash32 channel_id{};
    std::uint64_t index = 0;                    // i, starting at 1
    std::uint64_t cumulative_miner_balance = 0; // total fees after payment i
    std::vector<TxId> referenced_tx0;           // |referenced_tx0| == index
    bool sender_signature_present = true;

    bool operator==(const AggregationTx&) const = default;
};

// id = H(tag || sender || miner || open-nonce). The open height is left out
// of the preimage on purpose: the id must be known when the open transaction
// is submitted, before its inclusion height exists.
Hash32 channel_id_for(const Address& sender, const Address& miner,
                      std::uint64_t open_nonce);

}  // namespace metasim
