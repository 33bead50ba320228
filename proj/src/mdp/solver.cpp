#include "metasim/mdp/solver.hpp"

#include <limits>

#include "metasim/rng.hpp"

namespace metasim::mdp {

namespace {

double best_action_value(const std::array<ActionSlot, 4>& slots,
                         const std::vector<double>& in) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& slot : slots) {
        if (!slot.valid) continue;
        double q = 0.0;
        for (int e = 0; e < slot.n; ++e)
            q += slot.t[e].prob * (slot.t[e].reward + in[slot.t[e].next]);
        if (q > best) best = q;
    }
    return best;
}

}  // namespace

void bellman_sweep_serial(const Mdp& mdp, const std::vector<double>& in,
                          std::vector<double>& out) {
    const std::size_t n = mdp.n_states();
    for (std::size_t s = 0; s < n; ++s) out[s] = best_action_value(mdp.slots[s], in);
}

void bellman_sweep_parallel(const Mdp& mdp, const std::vector<double>& in,
                            std::vector<double>& out) {
    const std::int64_t n = static_cast<std::int64_t>(mdp.n_states());
    // Jacobi update: every state reads only `in`, so the schedule cannot
    // change any result bit and the sweep matches the serial one exactly.
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < n; ++s)
        out[s] = best_action_value(mdp.slots[s], in);
}

Result<MdpSolution, SolveError> solve_optimal_policy(const Mdp& mdp,
                                                     const SolveOptions& opt) {
    const std::size_t n = mdp.n_states();
    std::vector<double> h(n, 0.0), nh(n, 0.0);

    double gain = 0.0, span = std::numeric_limits<double>::infinity();
    int it = 0;
    for (it = 1; it <= opt.max_iterations; ++it) {
        if (opt.parallel)
            bellman_sweep_parallel(mdp, h, nh);
        else
            bellman_sweep_serial(mdp, h, nh);

        double dmax = -std::numeric_limits<double>::infinity();
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n; ++s) {
            const double d = nh[s] - h[s];
            if (d > dmax) dmax = d;
            if (d < dmin) dmin = d;
        }
        span = dmax - dmin;
        gain = 0.5 * (dmax + dmin);

        const double ref = nh[0];
        for (std::size_t s = 0; s < n; ++s) h[s] = nh[s] - ref;

        if (span <= opt.tolerance) break;
    }
    if (span > opt.tolerance) return SolveError::NoConvergence;

    MdpSolution sol;
    sol.gain = gain;
    sol.residual = span;
    sol.iterations = it;
    sol.policy.resize(n, Action::Adopt);
    for (std::size_t s = 0; s < n; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        Action pick = Action::Adopt;
        for (int a = 0; a < 4; ++a) {  // enum order doubles as the tie-break
            const auto& slot = mdp.slots[s][a];
            if (!slot.valid) continue;
            double q = 0.0;
            for (int e = 0; e < slot.n; ++e)
                q += slot.t[e].prob * (slot.t[e].reward + h[slot.t[e].next]);
            if (q > best) {
                best = q;
                pick = static_cast<Action>(a);
            }
        }
        sol.policy[s] = pick;
    }
    return sol;
}

double rollout_policy_gain(const Mdp& mdp, const std::vector<Action>& policy,
                           std::uint64_t steps, std::uint64_t seed) {
    Rng rng(seed);
    std::uint32_t state = 0;
    double total = 0.0;
    for (std::uint64_t i = 0; i < steps; ++i) {
        const ActionSlot& slot = mdp.slots[state][static_cast<int>(policy[state])];
        const double u = rng.uniform01();
        double cum = 0.0;
        const Transition* chosen = &slot.t[slot.n - 1];
        for (int e = 0; e < slot.n; ++e) {
            cum += slot.t[e].prob;
            if (u < cum) {
                chosen = &slot.t[e];
                break;
            }
        }
        total += chosen->reward;
        state = chosen->next;
    }
    return total / static_cast<double>(steps);
}

}  // namespace metasim::mdp
