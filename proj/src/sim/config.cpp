#include "metasim/sim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace metasim::sim {

namespace {

using nlohmann::json;

// Internal parse failure; converted to ConfigFailure at the boundary.
struct Bad {
    ConfigFailure::Kind kind;
    std::string message;
};

[[noreturn]] void fail_parse(const std::string& msg) {
    throw Bad{ConfigFailure::Kind::ParseError, msg};
}

[[noreturn]] void fail_invariant(const std::string& msg) {
    throw Bad{ConfigFailure::Kind::InvariantViolation, msg};
}

// Leniency breeds silently-ignored typos; every object is checked against
// the exact key set it may carry.
void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& ctx) {
    if (!obj.is_object()) fail_parse(ctx + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const auto& a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) fail_parse(ctx + ": unknown key '" + key + "'");
    }
}

std::uint64_t get_u64(const json& obj, const std::string& key, const std::string& ctx,
                      std::optional<std::uint64_t> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail_parse(ctx + ": missing key '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail_parse(ctx + ": '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_double(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key)) fail_parse(ctx + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) fail_parse(ctx + ": '" + key + "' must be a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& ctx,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail_parse(ctx + ": '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key)) fail_parse(ctx + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_string()) fail_parse(ctx + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

Address get_address(const json& obj, const std::string& key, const std::string& ctx) {
    return derived_address(get_u64(obj, key, ctx));
}

chain::SimConfig parse_sim(const json& j) {
    check_keys(j, {"block_gas_limit", "base_tx_gas", "seed", "channel_timeout_blocks",
                   "coinbase_native"},
               "sim");
    chain::SimConfig cfg;
    cfg.block_gas_limit = get_u64(j, "block_gas_limit", "sim", cfg.block_gas_limit);
    cfg.base_tx_gas = get_u64(j, "base_tx_gas", "sim", cfg.base_tx_gas);
    cfg.seed = get_u64(j, "seed", "sim", cfg.seed);
    cfg.channel_timeout_blocks =
        get_u64(j, "channel_timeout_blocks", "sim", cfg.channel_timeout_blocks);
    cfg.coinbase_native = get_u64(j, "coinbase_native", "sim", cfg.coinbase_native);
    if (cfg.base_tx_gas == 0 || cfg.block_gas_limit < cfg.base_tx_gas)
        fail_invariant("sim: need block_gas_limit >= base_tx_gas > 0");
    return cfg;
}

void parse_miners(const json& j, Scenario& sc) {
    check_keys(j, {"explicit", "sampled"}, "miners");
    if (j.contains("explicit") == j.contains("sampled"))
        fail_parse("miners: give exactly one of 'explicit' or 'sampled'");

    if (j.contains("explicit")) {
        const auto& arr = j.at("explicit");
        if (!arr.is_array() || arr.empty())
            fail_invariant("miners.explicit: need at least one miner");
        double total = 0.0;
        for (const auto& m : arr) {
            check_keys(m, {"id", "share", "accepts_meta_fees"}, "miners.explicit[]");
            chain::MinerProfile p;
            p.miner_id = get_address(m, "id", "miners.explicit[]");
            p.hash_share = get_double(m, "share", "miners.explicit[]");
            p.accepts_meta_fees = get_bool(m, "accepts_meta_fees", "miners.explicit[]", true);
            if (p.hash_share < 0.0 || p.hash_share > 1.0)
                fail_invariant("miners.explicit[]: share must lie in [0, 1]");
            total += p.hash_share;
            sc.miners.push_back(p);
        }
        if (std::abs(total - 1.0) > 1e-9)
            fail_invariant("miners.explicit: shares must sum to 1");
    } else {
        const auto& s = j.at("sampled");
        check_keys(s, {"count", "lambda", "accepts_meta_fees"}, "miners.sampled");
        SampledMiners sm;
        sm.count = get_u64(s, "count", "miners.sampled");
        sm.lambda = get_double(s, "lambda", "miners.sampled");
        sm.accepts_meta_fees = get_bool(s, "accepts_meta_fees", "miners.sampled", true);
        if (sm.count == 0) fail_invariant("miners.sampled: count must be >= 1");
        if (sm.lambda <= 0.0) fail_invariant("miners.sampled: lambda must be > 0");
        sc.sampled = sm;
    }
}

void parse_funding(const json& j, Scenario& sc) {
    check_keys(j, {"native", "meta"}, "funding");
    auto read_side = [&](const char* key,
                         std::vector<std::pair<Address, std::uint64_t>>& out) {
        if (!j.contains(key)) return;
        const auto& arr = j.at(key);
        if (!arr.is_array()) fail_parse(std::string("funding.") + key + ": expected an array");
        for (const auto& e : arr) {
            check_keys(e, {"id", "amount"}, std::string("funding.") + key + "[]");
            out.emplace_back(get_address(e, "id", "funding[]"),
                             get_u64(e, "amount", "funding[]"));
        }
    };
    read_side("native", sc.funding.native);
    read_side("meta", sc.funding.meta);
}

SenderSpec parse_sender(const json& j) {
    const std::string scheme = get_string(j, "scheme", "senders[]");
    SenderSpec spec;
    spec.address = get_address(j, "id", "senders[]");

    if (scheme == "relayer") {
        check_keys(j, {"scheme", "id", "relayer", "target", "meta_fee_offered",
                       "relayer_fee_native", "fee_payer", "honest", "count",
                       "every_n_ticks"},
                   "senders[relayer]");
        RelayerBehavior b;
        b.relayer = get_address(j, "relayer", "senders[relayer]");
        b.target = get_address(j, "target", "senders[relayer]");
        b.meta_fee_offered = get_u64(j, "meta_fee_offered", "senders[relayer]", 1);
        b.relayer_fee_native = get_u64(j, "relayer_fee_native", "senders[relayer]", 1);
        const std::string payer =
            j.contains("fee_payer") ? get_string(j, "fee_payer", "senders[relayer]")
                                    : "sender";
        if (payer == "sender")
            b.fee_payer = schemes::FeePayer::Sender;
        else if (payer == "receiver")
            b.fee_payer = schemes::FeePayer::Receiver;
        else
            fail_parse("senders[relayer]: fee_payer must be 'sender' or 'receiver'");
        b.honest = get_bool(j, "honest", "senders[relayer]", true);
        b.count = get_u64(j, "count", "senders[relayer]", 1);
        b.every_n_ticks = get_u64(j, "every_n_ticks", "senders[relayer]", 1);
        spec.behavior = b;
    } else if (scheme == "miner") {
        check_keys(j, {"scheme", "id", "target", "amount", "meta_fee",
                       "direct_to_miner", "batch", "count", "every_n_ticks"},
                   "senders[miner]");
        MinerSchemeBehavior b;
        b.target = get_address(j, "target", "senders[miner]");
        b.amount = get_u64(j, "amount", "senders[miner]", 0);
        b.meta_fee = get_u64(j, "meta_fee", "senders[miner]", 1);
        b.direct_to_miner = get_bool(j, "direct_to_miner", "senders[miner]", false);
        b.batch = get_u64(j, "batch", "senders[miner]", 1);
        b.count = get_u64(j, "count", "senders[miner]", 1);
        b.every_n_ticks = get_u64(j, "every_n_ticks", "senders[miner]", 1);
        if (b.batch == 0) fail_invariant("senders[miner]: batch must be >= 1");
        spec.behavior = b;
    } else if (scheme == "channel") {
        check_keys(j, {"scheme", "id", "channels_top_n", "collateral", "fee",
                       "payments", "close_mode", "close_at_tick", "target", "amount"},
                   "senders[channel]");
        ChannelBehavior b;
        b.channels_top_n = get_u64(j, "channels_top_n", "senders[channel]", 1);
        b.collateral = get_u64(j, "collateral", "senders[channel]", 0);
        b.fee = get_u64(j, "fee", "senders[channel]", 1);
        b.payments = get_u64(j, "payments", "senders[channel]", 1);
        const std::string mode =
            j.contains("close_mode") ? get_string(j, "close_mode", "senders[channel]")
                                     : "proofs";
        if (mode == "proofs")
            b.close_mode = ChannelBehavior::CloseMode::Proofs;
        else if (mode == "ack")
            b.close_mode = ChannelBehavior::CloseMode::Ack;
        else if (mode == "expire")
            b.close_mode = ChannelBehavior::CloseMode::Expire;
        else
            fail_parse("senders[channel]: close_mode must be proofs|ack|expire");
        b.close_at_tick = get_u64(j, "close_at_tick", "senders[channel]", 0);
        b.target = get_address(j, "target", "senders[channel]");
        b.amount = get_u64(j, "amount", "senders[channel]", 0);
        if (b.channels_top_n == 0)
            fail_invariant("senders[channel]: channels_top_n must be >= 1");
        if (b.fee == 0) fail_invariant("senders[channel]: fee must be >= 1");
        spec.behavior = b;
    } else {
        fail_parse("senders[]: scheme must be relayer|miner|channel");
    }
    return spec;
}

Scenario parse_checked(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail_parse(std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, {"version", "name", "sim", "miners", "funding", "senders", "ticks"},
               "scenario");
    if (get_u64(j, "version", "scenario") != 1)
        fail_parse("scenario: unsupported version (expected 1)");

    Scenario sc;
    sc.name = get_string(j, "name", "scenario");
    if (sc.name.empty()) fail_invariant("scenario: name must not be empty");
    if (!j.contains("sim")) fail_parse("scenario: missing key 'sim'");
    sc.sim = parse_sim(j.at("sim"));
    if (!j.contains("miners")) fail_parse("scenario: missing key 'miners'");
    parse_miners(j.at("miners"), sc);
    if (j.contains("funding")) parse_funding(j.at("funding"), sc);
    if (j.contains("senders")) {
        const auto& arr = j.at("senders");
        if (!arr.is_array()) fail_parse("senders: expected an array");
        for (const auto& s : arr) sc.senders.push_back(parse_sender(s));
    }
    sc.ticks = get_u64(j, "ticks", "scenario");
    if (sc.ticks == 0) fail_invariant("scenario: ticks must be >= 1");
    return sc;
}

}  // namespace

Result<Scenario, ConfigFailure> parse_scenario(const std::string& json_text) {
    try {
        return parse_checked(json_text);
    } catch (const Bad& b) {
        return ConfigFailure{b.kind, b.message};
    }
}

Result<Scenario, ConfigFailure> load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return ConfigFailure{ConfigFailure::Kind::ParseError,
                             "cannot open config file: " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace metasim::sim
