#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metasim/ledger.hpp"
#include "metasim/result.hpp"
#include "metasim/schemes/relayer.hpp"

namespace metasim::sim {

// Per-sender behaviors driven once per tick by the runner.

struct RelayerBehavior {
    Address relayer;
    Address target;
    std::uint64_t meta_fee_offered = 1;
    std::uint64_t relayer_fee_native = 1;
    schemes::FeePayer fee_payer = schemes::FeePayer::Sender;
    bool honest = true;          // false models a censoring/crashed relayer
    std::uint64_t count = 1;     // total actions to request
    std::uint64_t every_n_ticks = 1;
};

struct MinerSchemeBehavior {
    Address target;
    std::uint64_t amount = 0;
    std::uint64_t meta_fee = 1;
    bool direct_to_miner = false;  // sentinel receiver instead of anyone-can-spend
    std::uint64_t batch = 1;       // actions per fee follower
    std::uint64_t count = 1;       // total batches to issue
    std::uint64_t every_n_ticks = 1;
};

struct ChannelBehavior {
    std::uint64_t channels_top_n = 1;  // open channels to the N largest miners
    std::uint64_t collateral = 0;      // per channel; 0 means payments*fee
    std::uint64_t fee = 1;
    std::uint64_t payments = 1;        // off-chain payments to make in total
    enum class CloseMode { Proofs, Ack, Expire } close_mode = CloseMode::Proofs;
    std::uint64_t close_at_tick = 0;   // 0: right after the last payment lands
    Address target;                    // receiver of the secured actions
    std::uint64_t amount = 0;
};

struct SenderSpec {
    Address address;
    std::variant<RelayerBehavior, MinerSchemeBehavior, ChannelBehavior> behavior;
};

struct SampledMiners {
    std::size_t count = 70;
    double lambda = 2.4045;
    bool accepts_meta_fees = true;
};

struct Funding {
    std::vector<std::pair<Address, std::uint64_t>> native;
    std::vector<std::pair<Address, std::uint64_t>> meta;
};

struct Scenario {
    std::string name;
    chain::SimConfig sim;
    std::vector<chain::MinerProfile> miners;  // explicit, or
    std::optional<SampledMiners> sampled;     // drawn from the run's seed
    Funding funding;
    std::vector<SenderSpec> senders;
    std::uint64_t ticks = 1;
};

// Parse failures (exit 2) are malformed/unknown config text; invariant
// failures (exit 3) are well-formed configs describing an invalid world
// (shares not summing to 1, no miners, zero ticks...).
struct ConfigFailure {
    enum class Kind { ParseError, InvariantViolation } kind;
    std::string message;
};

Result<Scenario, ConfigFailure> parse_scenario(const std::string& json_text);
Result<Scenario, ConfigFailure> load_scenario(const std::string& path);

}  // namespace metasim::sim
