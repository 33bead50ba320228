#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "metasim/result.hpp"

namespace metasim::mdp {

// Which currency the per-block fee constant is denominated in. The automaton
// is built identically for both; the knob exists so the equality can be
// demonstrated rather than assumed.
enum class Regime : std::uint8_t { Native = 0, Meta = 1 };

struct MdpParams {
    double alpha = 0.3;       // attacker's hashrate share, in (0, 0.5)
    double gamma = 0.0;       // honest miners siding with the attacker in a race
    double stale_rate = 0.0;  // fraction of honest blocks that go stale
    int confirmations = 6;    // victim waits this many blocks before paying out
    double fee_const = 0.05;  // fee income per block, in block-reward units
    int max_lead = 20;        // state-space truncation for both chain lengths
    Regime regime = Regime::Native;
};

// Fork label from the selfish-mining state machine: whether the honest
// network just extended its own chain (Irrelevant), the attacker could still
// race it (Relevant), or a race is in progress (Active).
enum class Fork : std::uint8_t { Irrelevant = 0, Relevant = 1, Active = 2 };

struct MdpState {
    int a = 0;  // attacker's private chain length
    int h = 0;  // honest public chain length
    Fork fork = Fork::Irrelevant;

    bool operator==(const MdpState&) const = default;
};

// Order is the fixed tie-breaking order for policy extraction.
enum class Action : std::uint8_t { Adopt = 0, Override = 1, Match = 2, Wait = 3 };

struct Transition {
    std::uint32_t next = 0;
    double prob = 0.0;
    double reward = 0.0;  // attacker blocks credited on this edge, fee-scaled

    bool operator==(const Transition&) const = default;
};

struct ActionSlot {
    bool valid = false;
    std::array<Transition, 3> t{};
    int n = 0;

    bool operator==(const ActionSlot&) const = default;
};

// Dense automaton: one slot per (state, action), each with at most three
// outgoing edges. States are (a, h, fork) triples with both lengths capped at
// max_lead; at the cap only Adopt remains so the chain cannot run away.
struct Mdp {
    int max_lead = 0;
    int confirmations = 0;
    std::vector<std::array<ActionSlot, 4>> slots;  // indexed by state

    std::size_t n_states() const { return slots.size(); }

    bool operator==(const Mdp&) const = default;
};

std::uint32_t state_index(const MdpState& s, int max_lead);
MdpState state_of(std::uint32_t index, int max_lead);

enum class ModelError { InvalidParams };

// Builds the double-spend automaton. Every block that ends up on the winning
// chain pays its owner (1 + fee_const); on top of that the attacker collects
// `vd` once when an override or won race buries the victim's k-confirmed
// payout under the attacker's chain.
Result<Mdp, ModelError> build_mdp(const MdpParams& p, double vd);

// Attacker's long-run reward rate under plain honest mining, used as the
// profitability bar: its share of non-stale blocks times the per-block value.
double honest_baseline(const MdpParams& p);

}  // namespace metasim::mdp
