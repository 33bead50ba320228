#pragma once

#include <cstdint>
#include <string>

#include "metasim/result.hpp"
#include "metasim/sim/scenario.hpp"

namespace metasim::sim {

struct RunSummary {
    std::uint64_t ticks = 0;
    std::uint64_t blocks = 0;
    std::uint64_t txs_mined = 0;
    std::uint64_t fee_follower_pairs_mined = 0;
    std::uint64_t actions_requested = 0;
    std::uint64_t actions_mined = 0;
    std::size_t atomicity_violations = 0;
    bool conservation_ok = true;
    std::uint64_t channels_opened = 0;
    std::uint64_t channels_settled = 0;
    std::uint64_t channels_refunded = 0;
    std::uint64_t settled_to_miners_total = 0;
    std::uint64_t refunded_to_senders_total = 0;
    std::uint64_t total_fees_native = 0;
    std::uint64_t total_fees_meta = 0;
};

struct RunFailure {
    enum class Kind { Io, InvariantViolation } kind;
    std::string message;
};

// Executes the scenario tick by tick (one miner election and one block per
// tick) and writes chain.jsonl, blocks.csv, channel_events.csv, summary.json
// and manifest.json into out_dir. Fully deterministic in the scenario seed:
// a second run produces byte-identical files.
Result<RunSummary, RunFailure> run_scenario(const Scenario& scenario,
                                            const std::string& out_dir);

}  // namespace metasim::sim
