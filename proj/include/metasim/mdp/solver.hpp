#pragma once

#include <vector>

#include "metasim/mdp/model.hpp"
#include "metasim/result.hpp"

namespace metasim::mdp {

struct SolveOptions {
    double tolerance = 1e-8;  // stop when the Bellman-update span drops below
    int max_iterations = 200000;
    bool parallel = true;     // OpenMP sweep; serial path kept as reference
};

struct MdpSolution {
    std::vector<Action> policy;  // greedy argmax per state, fixed tie-break
    double gain = 0.0;           // average reward per step
    double residual = 0.0;       // final span, ≤ tolerance on success
    int iterations = 0;
};

enum class SolveError { NoConvergence };

// Average-reward relative value iteration. Each sweep is a Jacobi update
// (new values computed only from old ones), which makes the parallel and
// serial sweeps bitwise identical and the whole solve deterministic.
Result<MdpSolution, SolveError> solve_optimal_policy(const Mdp& mdp,
                                                     const SolveOptions& opt = {});

// One Bellman sweep over all states: out[s] = max over valid actions of
// Σ p·(r + in[next]). Exposed for the reference-vs-parallel benchmark and
// the equality tests.
void bellman_sweep_serial(const Mdp& mdp, const std::vector<double>& in,
                          std::vector<double>& out);
void bellman_sweep_parallel(const Mdp& mdp, const std::vector<double>& in,
                            std::vector<double>& out);

// Long-run average reward of a fixed policy, estimated by a seeded rollout.
// Test oracle for the solver's reported gain.
double rollout_policy_gain(const Mdp& mdp, const std::vector<Action>& policy,
                           std::uint64_t steps, std::uint64_t seed);

}  // namespace metasim::mdp
