#include "metasim/mdp/security.hpp"

#include <cmath>
#include <limits>

namespace metasim::mdp {

namespace {

// Whether some policy beats honest mining by more than the noise margin at
// this double-spend payout.
Result<bool, ModelError> attack_profitable(const MdpParams& p, double vd,
                                           const SearchOptions& opt) {
    auto mdp = build_mdp(p, vd);
    if (!mdp) return mdp.error();
    auto sol = solve_optimal_policy(mdp.value(), opt.solve);
    if (!sol) return ModelError::InvalidParams;  // cap hit: treat as unusable params
    return sol.value().gain > honest_baseline(p) + opt.margin;
}

}  // namespace

Result<double, ModelError> double_spend_value(const MdpParams& p,
                                              const SearchOptions& opt) {
    auto at_max = attack_profitable(p, opt.vd_max, opt);
    if (!at_max) return at_max.error();
    if (!at_max.value()) return std::numeric_limits<double>::infinity();

    double lo = 0.0, hi = opt.vd_max;
    while (hi - lo > opt.vd_tol) {
        const double mid = 0.5 * (lo + hi);
        auto r = attack_profitable(p, mid, opt);
        if (!r) return r.error();
        (r.value() ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

Result<double, ModelError> compare_meta_native(const MdpParams& p,
                                               const SearchOptions& opt) {
    MdpParams pn = p;
    pn.regime = Regime::Native;
    MdpParams pm = p;
    pm.regime = Regime::Meta;

    auto vn = double_spend_value(pn, opt);
    if (!vn) return vn.error();
    auto vm = double_spend_value(pm, opt);
    if (!vm) return vm.error();

    if (std::isinf(vn.value()) && std::isinf(vm.value())) return 0.0;
    return vm.value() - vn.value();
}

std::vector<SweepPoint> security_sweep(const std::vector<double>& alphas,
                                       const std::vector<int>& confirmation_grid,
                                       const MdpParams& base,
                                       const SearchOptions& opt) {
    const std::int64_t total =
        static_cast<std::int64_t>(alphas.size() * confirmation_grid.size());
    std::vector<SweepPoint> out(static_cast<std::size_t>(total));

    // Grid points are independent; each slot is written exactly once, so the
    // output order is fixed by the grid regardless of scheduling.
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < total; ++i) {
        const std::size_t ai = static_cast<std::size_t>(i) / confirmation_grid.size();
        const std::size_t ki = static_cast<std::size_t>(i) % confirmation_grid.size();

        MdpParams p = base;
        p.alpha = alphas[ai];
        p.confirmations = confirmation_grid[ki];
        if (p.max_lead < p.confirmations + 2) p.max_lead = p.confirmations + 2 + 6;

        SweepPoint pt;
        pt.alpha = p.alpha;
        pt.confirmations = p.confirmations;
        pt.fee_const = p.fee_const;

        p.regime = Regime::Native;
        auto vn = double_spend_value(p, opt);
        p.regime = Regime::Meta;
        auto vm = double_spend_value(p, opt);
        pt.vd_native = vn ? vn.value() : std::numeric_limits<double>::quiet_NaN();
        pt.vd_meta = vm ? vm.value() : std::numeric_limits<double>::quiet_NaN();
        if (std::isinf(pt.vd_native) && std::isinf(pt.vd_meta))
            pt.difference = 0.0;
        else
            pt.difference = pt.vd_meta - pt.vd_native;

        out[static_cast<std::size_t>(i)] = pt;
    }
    return out;
}

}  // namespace metasim::mdp
