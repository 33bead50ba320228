#pragma once

#include <vector>

#include "metasim/mdp/model.hpp"
#include "metasim/mdp/solver.hpp"
#include "metasim/result.hpp"

namespace metasim::mdp {

struct SearchOptions {
    double vd_max = 1e4;     // give up above this and report the infinity sentinel
    double vd_tol = 1e-3;    // bisection width
    double margin = 1e-6;    // required edge over the honest baseline
    SolveOptions solve{};
};

// Minimal double-spend payout at which some attack policy strictly beats
// honest mining, found by bisecting on the payout. +infinity when even
// vd_max is not enough (weak attackers, deep confirmations).
Result<double, ModelError> double_spend_value(const MdpParams& p,
                                              const SearchOptions& opt = {});

// double_spend_value(meta) − double_spend_value(native) at otherwise equal
// parameters. Zero up to search tolerance by construction; both-infinite
// compares as 0.
Result<double, ModelError> compare_meta_native(const MdpParams& p,
                                               const SearchOptions& opt = {});

struct SweepPoint {
    double alpha = 0.0;
    int confirmations = 0;
    double fee_const = 0.0;
    double vd_native = 0.0;
    double vd_meta = 0.0;
    double difference = 0.0;
};

// Evaluates the grid in parallel (points are independent); results are
// ordered by (alpha, confirmations) regardless of scheduling.
std::vector<SweepPoint> security_sweep(const std::vector<double>& alphas,
                                       const std::vector<int>& confirmation_grid,
                                       const MdpParams& base,
                                       const SearchOptions& opt = {});

}  // namespace metasim::mdp
