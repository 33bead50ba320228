#include "metasim/mdp/model.hpp"

namespace metasim::mdp {

namespace {

// One block event per step: with probability pa the attacker extends its
// private chain, otherwise the honest network extends the public one. Stale
// honest blocks drop out of the race entirely, which is equivalent to
// boosting the attacker's effective share.
double effective_attacker_share(const MdpParams& p) {
    const double denom = p.alpha + (1.0 - p.alpha) * (1.0 - p.stale_rate);
    return denom == 0.0 ? 0.0 : p.alpha / denom;
}

void add_edge(ActionSlot& slot, double prob, std::uint32_t next, double reward) {
    if (prob == 0.0) return;
    slot.t[slot.n++] = Transition{next, prob, reward};
}

}  // namespace

std::uint32_t state_index(const MdpState& s, int max_lead) {
    return static_cast<std::uint32_t>(
        (s.a * (max_lead + 1) + s.h) * 3 + static_cast<int>(s.fork));
}

MdpState state_of(std::uint32_t index, int max_lead) {
    MdpState s;
    s.fork = static_cast<Fork>(index % 3);
    const std::uint32_t ah = index / 3;
    s.h = static_cast<int>(ah % (max_lead + 1));
    s.a = static_cast<int>(ah / (max_lead + 1));
    return s;
}

double honest_baseline(const MdpParams& p) {
    return effective_attacker_share(p) * (1.0 + p.fee_const);
}

Result<Mdp, ModelError> build_mdp(const MdpParams& p, double vd) {
    if (p.alpha < 0.0 || p.alpha > 0.5) return ModelError::InvalidParams;
    if (p.gamma < 0.0 || p.gamma > 1.0) return ModelError::InvalidParams;
    if (p.stale_rate < 0.0 || p.stale_rate >= 1.0) return ModelError::InvalidParams;
    if (p.confirmations < 1) return ModelError::InvalidParams;
    if (p.fee_const < 0.0 || vd < 0.0) return ModelError::InvalidParams;
    if (p.max_lead < p.confirmations + 2) return ModelError::InvalidParams;

    const int L = p.max_lead;
    const int k = p.confirmations;
    const double pa = effective_attacker_share(p);
    const double ph = 1.0 - pa;
    const double R = 1.0 + p.fee_const;  // block reward plus fee income

    Mdp mdp;
    mdp.max_lead = L;
    mdp.confirmations = k;
    mdp.slots.assign(static_cast<std::size_t>((L + 1) * (L + 1) * 3), {});

    auto sid = [L](int a, int h, Fork f) {
        return state_index({a, h, f}, L);
    };

    for (int a = 0; a <= L; ++a) {
        for (int h = 0; h <= L; ++h) {
            for (int fi = 0; fi < 3; ++fi) {
                const Fork f = static_cast<Fork>(fi);
                auto& slots = mdp.slots[sid(a, h, f)];
                const bool truncated = (a == L || h == L);

                // Adopt: concede the honest chain, restart from scratch. The
                // attacker banks nothing. Offered whenever there is an honest
                // chain to adopt, and forced at the truncation boundary.
                if (h >= 1 || truncated) {
                    auto& s = slots[static_cast<int>(Action::Adopt)];
                    s.valid = true;
                    add_edge(s, pa, sid(1, 0, Fork::Irrelevant), 0.0);
                    add_edge(s, ph, sid(0, 1, Fork::Relevant), 0.0);
                }
                if (truncated) continue;

                // Override: publish h+1 private blocks, orphaning the honest
                // chain. All published blocks pay R; when the buried chain
                // had reached the victim's confirmation depth, the
                // double-spend payout lands on top.
                if (a > h) {
                    auto& s = slots[static_cast<int>(Action::Override)];
                    s.valid = true;
                    const double rw = R * (h + 1) + (h >= k ? vd : 0.0);
                    add_edge(s, pa, sid(a - h, 0, Fork::Irrelevant), rw);
                    add_edge(s, ph, sid(a - h - 1, 1, Fork::Relevant), rw);
                }

                // Match: publish exactly h blocks, splitting the honest
                // network. The gamma fraction mining on the attacker's fork
                // finishes the race in its favor.
                if (a >= h && h >= 1 && f == Fork::Relevant) {
                    auto& s = slots[static_cast<int>(Action::Match)];
                    s.valid = true;
                    const double rw = R * h + (h >= k ? vd : 0.0);
                    add_edge(s, pa, sid(a + 1, h, Fork::Active), 0.0);
                    add_edge(s, ph * p.gamma, sid(a - h, 1, Fork::Relevant), rw);
                    add_edge(s, ph * (1.0 - p.gamma), sid(a, h + 1, Fork::Relevant), 0.0);
                }

                // Wait: keep mining in secret. During an active race the
                // gamma side may still hand the attacker the win. (An Active
                // state with a < h cannot arise from any playable sequence;
                // such states fall through to the plain-growth dynamics so
                // every slot stays well-formed.)
                {
                    auto& s = slots[static_cast<int>(Action::Wait)];
                    s.valid = true;
                    if (f == Fork::Active && a >= h) {
                        const double rw = R * h + (h >= k ? vd : 0.0);
                        add_edge(s, pa, sid(a + 1, h, Fork::Active), 0.0);
                        add_edge(s, ph * p.gamma, sid(a - h, 1, Fork::Relevant), rw);
                        add_edge(s, ph * (1.0 - p.gamma), sid(a, h + 1, Fork::Relevant), 0.0);
                    } else {
                        add_edge(s, pa, sid(a + 1, h, Fork::Irrelevant), 0.0);
                        add_edge(s, ph, sid(a, h + 1, Fork::Relevant), 0.0);
                    }
                }
            }
        }
    }
    return mdp;
}

}  // namespace metasim::mdp
