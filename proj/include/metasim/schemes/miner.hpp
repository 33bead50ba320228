#pragma once

#include <utility>
#include <vector>

#include "metasim/ledger.hpp"
#include "metasim/metatx.hpp"
#include "metasim/result.hpp"

namespace metasim::schemes {

// One action a sender wants mined without touching the native fee market.
struct ActionSpec {
    Address target;
    std::uint64_t amount = 0;
    PayloadKind payload = PayloadKind::Noop;
};

enum class MinerSchemeError {
    InsufficientMetaBalance,
    BatchExceedsBlockCapacity,
    EmptyBatch,
};

// Builds the two-transaction construction: tx0 carries the action at zero
// fee, tx1 (next nonce) carries the meta fee and is pinned to tx0 so neither
// can be mined without the other. With direct_to_miner the fee goes to
// whichever miner includes the pair (sentinel receiver); otherwise it accrues
// at the anyone-can-spend address for later sweeping.
Result<Metatransaction, MinerSchemeError> miner_metatx_issue(
    const Address& sender, const ActionSpec& action, std::uint64_t meta_fee,
    bool direct_to_miner, const chain::Ledger& ledger);

// Batched form: k zero-fee actions at consecutive nonces capped by one fee
// follower pinned to the last of them. All k+1 transactions must fit in a
// single block, or the batch can never be mined atomically.
Result<std::pair<std::vector<Transaction>, Transaction>, MinerSchemeError>
miner_metatx_batch(const Address& sender, const std::vector<ActionSpec>& actions,
                   std::uint64_t meta_fee, bool direct_to_miner,
                   const chain::Ledger& ledger, const chain::SimConfig& cfg);

}  // namespace metasim::schemes
