// metasim — command-line front-end.
//
// Analysis subcommands (econ-*, security-vd) sweep one calculator each and
// print CSV with a header row; `run` executes a scenario config and writes
// its artifacts to a directory.
//
// Exit codes are a stable contract:
//   0  success
//   2  command line or config file does not parse (unknown keys, bad types)
//   3  config parses but describes an invalid world (shares != 1, no miners)
//   1  runtime failure (e.g. output directory not writable)

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metasim/econ.hpp"
#include "metasim/mdp/security.hpp"
#include "metasim/rng.hpp"
#include "metasim/sim/runner.hpp"
#include "metasim/sim/scenario.hpp"

namespace {

using namespace metasim;

// "0,0.5,1" -> {0, 0.5, 1}
std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size()) throw CLI::ValidationError("bad number: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("empty list");
    return out;
}

// "1,3,6" or "1..12" (inclusive range) or a mix: "1,4..6,12"
std::vector<int> split_grid(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots != std::string::npos) {
            int lo = std::stoi(item.substr(0, dots));
            int hi = std::stoi(item.substr(dots + 2));
            if (lo > hi) throw CLI::ValidationError("bad range: " + item);
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(std::stoi(item));
        }
    }
    if (out.empty()) throw CLI::ValidationError("empty list");
    return out;
}

std::string fmt(double v, int decimals) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// RFC-style CSV quoting; our fields are plain but the contract is documented.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// CSV goes to stdout unless --out names a file.
struct CsvSink {
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) file.open(path, std::ios::trunc);
        return file;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metatransaction economics and chain simulator"};
    app.require_subcommand(1);
    int rc = 0;

    // --- econ-throughput
    auto* tp = app.add_subcommand("econ-throughput",
                                  "throughput vs. delegated-fee fraction");
    std::string tp_profile = "paper-defaults";
    std::string tp_fractions = "0,0.25,0.5,0.75,1";
    CsvSink tp_out;
    tp->add_option("--profile", tp_profile,
                   "bitcoin | ethereum | tezos | paper-defaults");
    tp->add_option("--fractions", tp_fractions, "comma list in [0,1]");
    tp->add_option("--out", tp_out.path, "write CSV here instead of stdout");
    tp->callback([&] {
        auto prof = econ::profile_by_name(tp_profile);
        if (!prof) {
            std::cerr << "unknown profile: " << tp_profile << "\n";
            rc = 2;
            return;
        }
        auto& os = tp_out.stream();
        os << "profile,fraction,tps\n";
        for (double f : split_doubles(tp_fractions)) {
            auto tps = econ::throughput(prof.value().model, f);
            if (!tps) {
                std::cerr << "fraction out of range: " << f << "\n";
                rc = 2;
                return;
            }
            os << csv_field(tp_profile) << "," << fmt(f, 4) << ","
               << fmt(tps.value(), 6) << "\n";
        }
    });

    // --- econ-breakeven
    auto* be = app.add_subcommand("econ-breakeven",
                                  "amortization point of fee channels");
    std::uint64_t be_open = econ::defaults::kChannelOpenGas;
    std::uint64_t be_overhead = econ::defaults::kMinerSchemeOverheadGas;
    std::string be_channels = "1,10,20";
    CsvSink be_out;
    be->add_option("--open", be_open, "gas to open one channel");
    be->add_option("--overhead", be_overhead, "per-tx overhead gas saved");
    be->add_option("--channels", be_channels, "comma list / a..b range");
    be->add_option("--out", be_out.path, "write CSV here instead of stdout");
    be->callback([&] {
        auto& os = be_out.stream();
        os << "channels,open_gas,per_tx_overhead_gas,breakeven\n";
        for (int n : split_grid(be_channels)) {
            if (n < 0) throw CLI::ValidationError("negative channel count");
            os << n << "," << be_open << "," << be_overhead << ","
               << econ::breakeven(be_open, be_overhead, (std::uint64_t)n) << "\n";
        }
    });

    // --- econ-inclusion
    auto* inc = app.add_subcommand(
        "econ-inclusion", "inclusion probability vs. number of channels");
    std::uint64_t inc_pools = 70;
    double inc_lambda = econ::defaults::kPoolLambda;
    std::uint64_t inc_seed = 1;
    std::string inc_top = "1,2,3,4,5,7,10,15,20";
    CsvSink inc_out;
    inc->add_option("--pools", inc_pools, "pool count to sample");
    inc->add_option("--lambda", inc_lambda, "exponential rate of the shares");
    inc->add_option("--seed", inc_seed, "sampling seed");
    inc->add_option("--top", inc_top, "channel counts, comma list / a..b");
    inc->add_option("--out", inc_out.path, "write CSV here instead of stdout");
    inc->callback([&] {
        Rng rng(inc_seed);
        auto miners = econ::sample_pool_distribution(inc_pools, inc_lambda, rng);
        auto& os = inc_out.stream();
        os << "pools,lambda,seed,channels,inclusion_probability\n";
        for (int n : split_grid(inc_top)) {
            std::set<Address> open;
            for (int i = 0; i < n && i < (int)miners.size(); ++i)
                open.insert(miners[i].miner_id);
            os << inc_pools << "," << fmt(inc_lambda, 4) << "," << inc_seed << ","
               << n << "," << fmt(econ::inclusion_probability(open, miners), 6)
               << "\n";
        }
    });

    // --- econ-takeover
    auto* tk = app.add_subcommand(
        "econ-takeover", "fee-market takeover vs. hashrate rental cost");
    econ::TakeoverParams tkp;
    tkp.daily_fees_native = 1009.4;
    tkp.price_usd = 197.11;
    tkp.network_hash = 2.2e12;       // H/s
    tkp.unit_hash = 24e6;            // one rented GPU
    tkp.unit_price_usd_per_hour = 0.20;
    std::string tk_horizons = "1,24,168";
    CsvSink tk_out;
    tk->add_option("--daily-fees", tkp.daily_fees_native, "native units/day");
    tk->add_option("--price", tkp.price_usd, "USD per native unit");
    tk->add_option("--network-hash", tkp.network_hash, "H/s securing the chain");
    tk->add_option("--unit-hash", tkp.unit_hash, "H/s per rented unit");
    tk->add_option("--unit-price", tkp.unit_price_usd_per_hour, "USD/unit/hour");
    tk->add_option("--horizons", tk_horizons, "hours, comma list");
    tk->add_option("--out", tk_out.path, "write CSV here instead of stdout");
    tk->callback([&] {
        auto& os = tk_out.stream();
        os << "horizon_hours,takeover_usd,attack51_usd\n";
        for (double h : split_doubles(tk_horizons)) {
            auto c = econ::takeover_cost(tkp, h);
            os << fmt(h, 2) << "," << fmt(c.takeover_usd, 2) << ","
               << fmt(c.attack51_usd, 2) << "\n";
        }
    });

    // --- econ-subsidy
    auto* sb = app.add_subcommand("econ-subsidy",
                                  "subsidy-pool depletion under a refund policy");
    std::string sb_policy = "sqrt";
    std::uint64_t sb_pool = 1000000;
    std::string sb_fees = "1,2,4,9,16,25,100,10000";
    CsvSink sb_out;
    sb->add_option("--policy", sb_policy, "identity | sqrt");
    sb->add_option("--pool", sb_pool, "initial pool balance");
    sb->add_option("--fees", sb_fees,
                   "fee per step, comma list; pool carries over between rows");
    sb->add_option("--out", sb_out.path, "write CSV here instead of stdout");
    sb->callback([&] {
        econ::SubsidyPolicy pol;
        if (sb_policy == "identity")
            pol.kind = econ::SubsidyPolicy::Kind::Identity;
        else if (sb_policy == "sqrt")
            pol.kind = econ::SubsidyPolicy::Kind::Sqrt;
        else {
            std::cerr << "unknown policy: " << sb_policy << "\n";
            rc = 2;
            return;
        }
        pol.pool_balance = sb_pool;
        auto& os = sb_out.stream();
        os << "policy,pool_before,fee,refund,sender_net_cost,pool_after\n";
        for (int fee : split_grid(sb_fees)) {
            if (fee < 0) throw CLI::ValidationError("negative fee");
            auto step = econ::subsidy_step(pol, (std::uint64_t)fee);
            os << csv_field(sb_policy) << "," << pol.pool_balance << "," << fee
               << "," << step.refund << "," << step.sender_net_cost << ","
               << step.new_pool << "\n";
            pol.pool_balance = step.new_pool;
        }
    });

    // --- security-vd
    auto* sv = app.add_subcommand(
        "security-vd", "minimal profitable double-spend value per regime");
    std::string sv_alpha = "0.3";
    std::string sv_k = "6";
    mdp::MdpParams sv_base;
    mdp::SearchOptions sv_opt;
    CsvSink sv_out;
    sv->add_option("--alpha", sv_alpha, "attacker shares, comma list");
    sv->add_option("--k", sv_k, "confirmations, comma list / a..b range");
    sv->add_option("--fee-const", sv_base.fee_const, "per-block fee on top of 1");
    sv->add_option("--gamma", sv_base.gamma, "race win fraction");
    sv->add_option("--stale", sv_base.stale_rate, "honest stale rate");
    sv->add_option("--max-lead", sv_base.max_lead, "state-space truncation");
    sv->add_option("--vd-max", sv_opt.vd_max, "search ceiling (above: inf)");
    sv->add_option("--tol", sv_opt.vd_tol, "bisection width");
    sv->add_option("--out", sv_out.path, "write CSV here instead of stdout");
    sv->callback([&] {
        auto alphas = split_doubles(sv_alpha);
        auto ks = split_grid(sv_k);
        auto points = mdp::security_sweep(alphas, ks, sv_base, sv_opt);
        auto& os = sv_out.stream();
        os << "alpha,k,fee_const,vd_native,vd_meta,difference\n";
        for (const auto& p : points) {
            os << fmt(p.alpha, 4) << "," << p.confirmations << ","
               << fmt(p.fee_const, 4) << "," << fmt(p.vd_native, 3) << ","
               << fmt(p.vd_meta, 3) << "," << fmt(p.difference, 6) << "\n";
        }
    });

    // --- run
    auto* run = app.add_subcommand("run", "execute a scenario config");
    std::string run_config;
    std::uint64_t run_seed = 0;
    std::string run_out;
    run->add_option("--config", run_config, "scenario JSON path")
        ->required()
        ->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", run_seed, "override config seed");
    run->add_option("--out", run_out,
                    "artifact directory (default results/<name>/<seed>)");
    run->callback([&] {
        auto loaded = sim::load_scenario(run_config);
        if (!loaded) {
            const auto& f = loaded.error();
            std::cerr << "config error: " << f.message << "\n";
            rc = f.kind == sim::ConfigFailure::Kind::ParseError ? 2 : 3;
            return;
        }
        sim::Scenario sc = loaded.value();
        if (seed_opt->count() > 0) sc.sim.seed = run_seed;
        std::string out = run_out.empty()
                              ? "results/" + sc.name + "/" +
                                    std::to_string(sc.sim.seed)
                              : run_out;
        auto res = sim::run_scenario(sc, out);
        if (!res) {
            std::cerr << "run failed: " << res.error().message << "\n";
            rc = res.error().kind == sim::RunFailure::Kind::Io ? 1 : 3;
            return;
        }
        const auto& s = res.value();
        std::cout << "scenario " << sc.name << ": " << s.blocks << " blocks, "
                  << s.txs_mined << " txs, " << s.actions_mined << "/"
                  << s.actions_requested << " actions mined, atomicity "
                  << (s.atomicity_violations == 0 ? "ok" : "VIOLATED")
                  << ", conservation "
                  << (s.conservation_ok ? "ok" : "VIOLATED") << "\n";
        std::cout << "artifacts: " << out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help also lands here, with exit code 0.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return rc;
}
