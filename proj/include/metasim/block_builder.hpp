#pragma once

#include <set>
#include <vector>

#include "metasim/ledger.hpp"

namespace metasim::chain {

// Per-miner knowledge the builder consults beyond the public mempool:
// fee-channel coverage. A zero-fee transaction whose id appears here is
// worth including on its own because its fee is already secured off-chain.
struct MinerView {
    std::set<TxId> channel_secured;
};

// Assembles the best block this miner is willing to mine on top of `ledger`.
//
// Inclusion is decided in indivisible units so that fee-delegation pairs and
// fee-follower batches land all-or-nothing:
//   - a zero-fee action pinned by a fee-paying transaction forms a pair unit,
//   - a sender's zero-fee run capped by a fee follower forms a batch unit
//     (taken only when the miner accepts meta-denominated fees),
//   - channel-secured actions, channel housekeeping and sweeps ride alone.
// Units are filled greedily in mempool order under the gas budget, each
// validated against a scratch ledger so the result always applies cleanly.
Block build_block(const std::vector<Transaction>& mempool,
                  const MinerProfile& miner, const Ledger& ledger,
                  const SimConfig& cfg, const MinerView& view = {});

}  // namespace metasim::chain
