#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "metasim/ledger.hpp"
#include "metasim/result.hpp"
#include "metasim/rng.hpp"

namespace metasim::econ {

// Throughput degradation model: every delegated-fee transaction drags an
// overhead (extra bytes on UTXO chains, extra gas on account chains), so at
// fraction f of such transactions the effective per-tx cost grows and tps
// shrinks proportionally.
struct ThroughputModel {
    enum class Kind { SizeBased, GasBased } kind = Kind::GasBased;
    double base_tps = 0.0;
    double avg_tx_size = 0.0;   // bytes   (SizeBased)
    double utxo_overhead = 0.0; // bytes   (SizeBased)
    double avg_tx_gas = 0.0;    // gas     (GasBased)
    double overhead_gas = 0.0;  // gas     (GasBased)
};

enum class EconError { FractionOutOfRange, UnknownProfile };

Result<double, EconError> throughput(const ThroughputModel& m, double fraction);

// Smallest number of delegated-fee transactions whose per-tx overhead savings
// amortize the cost of opening `n_channels` fee channels.
std::uint64_t breakeven(std::uint64_t open_cost_gas, std::uint64_t per_tx_overhead_gas,
                        std::uint64_t n_channels);

// Probability that the next block is mined by a miner the sender has an open
// fee channel with (= per-block inclusion probability of its transactions).
double inclusion_probability(const std::set<Address>& open_channels,
                             const std::vector<chain::MinerProfile>& miners);

// Draws a hashrate distribution: n exponential variates normalized to shares
// summing to 1, sorted descending. Mirrors the observed heavy-head shape of
// real mining-pool shares.
std::vector<chain::MinerProfile> sample_pool_distribution(std::size_t n_pools,
                                                          double lambda, Rng& rng);

struct TakeoverParams {
    double daily_fees_native = 0.0;     // native units paid in fees per day
    double price_usd = 0.0;             // USD per native unit
    double network_hash = 0.0;          // H/s currently securing the chain
    double unit_hash = 0.0;             // H/s per rented unit
    double unit_price_usd_per_hour = 0.0;
};

struct TakeoverCost {
    double takeover_usd = 0.0;  // subsidize all fees for the horizon
    double attack51_usd = 0.0;  // rent the whole network's hashrate instead
};

// Cost of displacing the native fee market for `horizon_hours` versus the
// brute-force alternative of renting majority hashrate for the same time.
TakeoverCost takeover_cost(const TakeoverParams& p, double horizon_hours);

// Collateral a sender must lock to fund `cnt` payments of `fee` on each of
// `n_channels` channels.
std::uint64_t deposit_requirement(std::uint64_t cnt, std::uint64_t fee,
                                  std::uint64_t n_channels);

// Fee-refund policy of a takeover subsidy pool. Identity refunds the full
// fee (free riding for counter-attackers); Sqrt refunds only the square root
// so every transaction still costs its sender something.
struct SubsidyPolicy {
    enum class Kind { Identity, Sqrt } kind = Kind::Identity;
    std::uint64_t pool_balance = 0;
};

struct SubsidyStep {
    std::uint64_t refund = 0;
    std::uint64_t new_pool = 0;
    std::uint64_t sender_net_cost = 0;
};

// One subsidized transaction with fee `fee_x`; the refund is capped by what
// is left in the pool.
SubsidyStep subsidy_step(const SubsidyPolicy& policy, std::uint64_t fee_x);

// Named parameter sets used by the CLI and the test suite.
struct Profile {
    std::string name;
    ThroughputModel model;
    // Gas constants for fee-channel arithmetic (account chains).
    std::uint64_t channel_open_gas = 0;
    std::uint64_t per_tx_overhead_gas = 0;
    std::uint64_t block_gas_limit = 0;
};

Result<Profile, EconError> profile_by_name(const std::string& name);

// Gas overheads shipped with the defaults profile.
namespace defaults {
inline constexpr std::uint64_t kMinerSchemeOverheadGas = 15188;
inline constexpr std::uint64_t kRelayerSchemeOverheadGas = 47241;
inline constexpr std::uint64_t kChannelOpenGas = 92392;
inline constexpr std::uint64_t kChannelOpenGasConservative = 250000;
inline constexpr std::uint64_t kChannelCloseGas = 850000;
inline constexpr std::uint64_t kTezosOverheadGas = 10000;
inline constexpr std::uint64_t kEthBlockGasLimit = 8003131;
inline constexpr std::uint64_t kTezosBlockGasLimit = 4000000;
inline constexpr double kPoolLambda = 2.4045;
}  // namespace defaults

}  // namespace metasim::econ
