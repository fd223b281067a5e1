#pragma once

#include <Eigen/Dense>

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/network.hpp>
#include <hcim/rng.hpp>
#include <hcim/transition.hpp>

namespace hcim {

/// Diffusion rule variants. voter, nlt and glt_binary are parameter
/// disciplines of the same choice rule; hc_general adds the media and
/// reluctance factors.
struct ModelMode {
    enum class Kind { hc, hc_general, voter, nlt, glt_binary };
    Kind kind = Kind::hc;
    double media_m = 1.0;
    double reluctance_r = 0.0;
    double glt_beta = 0.0;

    static ModelMode hc() { return {}; }
    static ModelMode hc_general(double m, double r) {
        return {Kind::hc_general, m, r, 0.0};
    }
    static ModelMode voter() { return {Kind::voter, 1.0, 0.0, 0.0}; }
    static ModelMode nlt() { return {Kind::nlt, 1.0, 0.0, 0.0}; }
    static ModelMode glt_binary(double beta) { return {Kind::glt_binary, 1.0, 0.0, beta}; }

    static ModelMode parse(const std::string& s) {
        if (s == "hc") return hc();
        if (s == "hc_general") return hc_general(1.0, 0.0);
        if (s == "voter") return voter();
        if (s == "nlt") return nlt();
        if (s.rfind("glt_binary:", 0) == 0) {
            try {
                return glt_binary(std::stod(s.substr(11)));
            } catch (const std::exception&) {
                throw ConfigError("cannot parse glt_binary beta in `" + s + "`");
            }
        }
        throw ConfigError("unknown model mode `" + s + "`");
    }
    std::string name() const {
        switch (kind) {
            case Kind::hc: return "hc";
            case Kind::hc_general: return "hc_general";
            case Kind::voter: return "voter";
            case Kind::nlt: return "nlt";
            case Kind::glt_binary: return "glt_binary";
        }
        return "?";
    }
};

/// Checks the parameter discipline a mode imposes on the augmented network.
inline void validate_mode(const AugmentedNetwork& aug, const ModelMode& mode) {
    switch (mode.kind) {
        case ModelMode::Kind::hc:
            return;
        case ModelMode::Kind::hc_general: {
            if (!(mode.media_m >= 0.0 && mode.media_m <= 1.0) ||
                !(mode.reluctance_r >= 0.0 && mode.reluctance_r <= 1.0))
                throw ValidationError("media/reluctance factors must lie in [0,1]");
            return;
        }
        case ModelMode::Kind::voter: {
            for (NodeIndex i = 0; i < aug.n_raw(); ++i) {
                auto [first, last] = aug.out_edges(i);
                if (first == last)
                    throw ValidationError("voter mode requires every node to have a neighbor");
                if (aug.bias_weight(i) != 0.0)
                    throw ValidationError("voter mode requires beta_i = 0 (node " +
                                          std::to_string(i) + ")");
                const double d = static_cast<double>(last - first);
                for (const Edge* e = first; e != last; ++e)
                    if (std::abs(e->weight - 1.0 / d) > 1e-12)
                        throw ValidationError("voter mode requires 1/out-degree weights");
            }
            return;
        }
        case ModelMode::Kind::nlt: {
            if (aug.bias_value() != 0.0)
                throw ValidationError("the nlt reduction requires bias value b = 0");
            return;
        }
        case ModelMode::Kind::glt_binary: {
            if (!(mode.glt_beta >= 0.0 && mode.glt_beta < 1.0))
                throw ValidationError("glt beta must lie in [0,1)");
            if (std::abs(aug.bias_value() - 0.5) > 1e-12)
                throw ValidationError("the binary glt reduction requires bias value b = 1/2");
            for (NodeIndex i = 0; i < aug.n_raw(); ++i)
                if (std::abs(aug.bias_weight(i) - mode.glt_beta) > 1e-12)
                    throw ValidationError("glt_binary requires uniform bias edges of weight beta");
            return;
        }
    }
}

/// Converts a threshold-style instance (row sums <= 1, per-node gap
/// g_i = 1 - sum_j w_ij) into the equivalent bias formulation: beta_i = g_i
/// and neighbor weights renormalized, to be paired with bias value 0.
inline Network nlt_to_hc(const Network& nlt_net) {
    Network out = nlt_net;
    std::vector<double> beta(static_cast<std::size_t>(nlt_net.n_raw()), 0.0);
    for (NodeIndex i = 0; i < nlt_net.n_raw(); ++i) {
        auto [first, last] = nlt_net.out_edges(i);
        double row = 0.0;
        for (const Edge* e = first; e != last; ++e) row += e->weight;
        if (row > 1.0 + 1e-12)
            throw ValidationError("threshold weights of node " + std::to_string(i) +
                                  " exceed 1");
        beta[static_cast<std::size_t>(i)] = std::min(1.0 - 1e-15, std::max(0.0, 1.0 - row));
    }
    out.set_beta(std::move(beta));
    return out;
}

/// One realization of the binary cascade. Seeds stay active forever; the
/// bias node's state is redrawn Bernoulli(b) every step so its expectation
/// matches the bias value at all times.
struct CascadeState {
    std::vector<std::uint8_t> active; // length n, bias node last
    std::int64_t t = 0;
    Philox4x64 rng{0, 0};
    SeedSet seeds;
    std::uint8_t media_active = 0;      // hc_general auxiliary draw
    std::uint8_t reluctance_active = 0; // hc_general auxiliary draw
};

enum class SamplingView { bernoulli, threshold };

inline CascadeState make_cascade_state(const AugmentedNetwork& aug, const SeedSet& seeds,
                                       const ModelMode& mode, std::uint64_t rng_seed,
                                       std::uint64_t stream = 0) {
    seeds.validate_against(aug);
    CascadeState st;
    st.seeds = seeds;
    st.rng = Philox4x64(rng_seed, stream);
    st.active.assign(static_cast<std::size_t>(aug.n()), 0);
    for (NodeIndex s : seeds.members()) st.active[static_cast<std::size_t>(s)] = 1;
    st.active[static_cast<std::size_t>(aug.bias_index())] =
        bernoulli(st.rng, aug.bias_value()) ? 1 : 0;
    st.media_active = bernoulli(st.rng, mode.media_m) ? 1 : 0;
    st.reluctance_active = bernoulli(st.rng, mode.reluctance_r) ? 1 : 0;
    return st;
}

/// Synchronous one-step update of the binary cascade under a mode's choice
/// rule. The bernoulli view draws a coin against the adoption probability;
/// the threshold view draws a fresh uniform threshold and adopts when it
/// falls below the weighted active mass. The two are distributionally
/// identical.
inline void step_binary_inplace(CascadeState& state, const AugmentedNetwork& aug,
                                const ModelMode& mode,
                                SamplingView view = SamplingView::bernoulli) {
    const NodeIndex n_raw = aug.n_raw();
    static thread_local std::vector<double> prob;
    prob.resize(static_cast<std::size_t>(n_raw));

    for (NodeIndex i = 0; i < n_raw; ++i) {
        if (state.seeds.contains(i)) continue;
        double p = 0.0;
        switch (mode.kind) {
            case ModelMode::Kind::hc:
            case ModelMode::Kind::voter:
            case ModelMode::Kind::nlt: {
                auto [first, last] = aug.out_edges(i);
                for (const Edge* e = first; e != last; ++e)
                    if (state.active[static_cast<std::size_t>(e->dst)]) p += e->weight;
                if (state.active[static_cast<std::size_t>(aug.bias_index())])
                    p += aug.bias_weight(i);
                break;
            }
            case ModelMode::Kind::glt_binary: {
                // beta/2 + (1 - beta) sum w delta; the first term is the
                // uniform re-pick over two colors.
                p = mode.glt_beta / 2.0;
                auto [first, last] = aug.out_edges(i);
                for (const Edge* e = first; e != last; ++e)
                    if (state.active[static_cast<std::size_t>(e->dst)]) p += e->weight;
                break;
            }
            case ModelMode::Kind::hc_general: {
                const double a = aug.alpha(i), g = aug.gamma(i);
                p = a * (state.media_active ? 1.0 : 0.0) +
                    g * (state.reluctance_active ? 1.0 : 0.0);
                const double scale = 1.0 - a - g;
                if (scale > 0.0) {
                    const double beta_i = aug.beta(i);
                    double mass = 0.0;
                    auto [first, last] = aug.out_edges(i);
                    for (const Edge* e = first; e != last; ++e)
                        if (state.active[static_cast<std::size_t>(e->dst)]) mass += e->weight;
                    // stored weights carry (1 - beta_i); undo to get omega-hat
                    if (beta_i < 1.0) mass /= (1.0 - beta_i);
                    p += scale * mass;
                }
                break;
            }
        }
        prob[static_cast<std::size_t>(i)] = p;
    }

    for (NodeIndex i = 0; i < n_raw; ++i) {
        if (state.seeds.contains(i)) continue;
        const double u = uniform01(state.rng);
        const double p = prob[static_cast<std::size_t>(i)];
        const bool adopt = view == SamplingView::bernoulli
                               ? u < p        // coin against the adoption probability
                               : u <= p;      // fresh threshold under the active mass
        state.active[static_cast<std::size_t>(i)] = adopt ? 1 : 0;
    }
    state.active[static_cast<std::size_t>(aug.bias_index())] =
        bernoulli(state.rng, aug.bias_value()) ? 1 : 0;
    if (mode.kind == ModelMode::Kind::hc_general) {
        state.media_active = bernoulli(state.rng, mode.media_m) ? 1 : 0;
        state.reluctance_active = bernoulli(state.rng, mode.reluctance_r) ? 1 : 0;
    }
    state.t += 1;
}

inline CascadeState step_binary(const CascadeState& state, const AugmentedNetwork& aug,
                                const ModelMode& mode,
                                SamplingView view = SamplingView::bernoulli) {
    validate_mode(aug, mode);
    CascadeState next = state;
    step_binary_inplace(next, aug, mode, view);
    return next;
}

inline std::int64_t count_active_original(const CascadeState& state, const AugmentedNetwork& aug) {
    std::int64_t c = 0;
    for (NodeIndex i = 0; i < aug.n_raw(); ++i)
        c += state.active[static_cast<std::size_t>(i)];
    return c;
}

/// Deterministic mean-field trajectory u(:, t).
struct TransientState {
    Eigen::VectorXd u; // length n, boundary entries pinned
    std::int64_t t = 0;
    Eigen::VectorXd z; // interior initial values
};

inline TransientState make_transient_state(const TransitionSystem& ts, double b,
                                           const Eigen::VectorXd& z = Eigen::VectorXd()) {
    TransientState st;
    st.z = z.size() == 0 ? Eigen::VectorXd::Zero(ts.n()) : z;
    if (st.z.size() != ts.n())
        throw ValidationError("initial condition z must have one entry per augmented node");
    st.u = st.z;
    for (NodeIndex s : ts.seeds().members()) st.u[s] = 1.0;
    st.u[ts.bias_index()] = b;
    return st;
}

/// u(t+1) = P u(t); boundary rows of P are identity rows, so seeds and the
/// bias stay pinned. Equivalently u(t+1) - u(t) = -L u(t).
inline TransientState step_transient(const TransientState& state, const TransitionSystem& ts,
                                     double b) {
    TransientState next;
    next.z = state.z;
    next.u = ts.P() * state.u;
    next.u[ts.bias_index()] = b;
    next.u = next.u.cwiseMax(0.0).cwiseMin(1.0);
    next.t = state.t + 1;
    return next;
}

/// sigma(S, t): the expected active count among original nodes after t
/// synchronous mean-field steps.
inline double transient_spread(const AugmentedNetwork& aug, const SeedSet& seeds,
                               const Eigen::VectorXd& z, double b, std::int64_t t) {
    if (t < 0) throw ValidationError("horizon must be nonnegative");
    const TransitionSystem ts = build_transition_system(aug, seeds);
    TransientState st = make_transient_state(ts, b, z);
    for (std::int64_t k = 0; k < t; ++k) st = step_transient(st, ts, b);
    double sigma = 0.0;
    for (NodeIndex i = 0; i < aug.n_raw(); ++i) sigma += st.u[i];
    return sigma;
}

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::int64_t runs = 0;
};

/// Monte Carlo estimate of the active count among original nodes at the
/// horizon. Runs are independent Philox substreams, so the estimate is
/// bit-reproducible under any thread schedule.
inline McEstimate mc_spread_estimate(const AugmentedNetwork& aug, const SeedSet& seeds,
                                     const ModelMode& mode, std::int64_t horizon,
                                     std::int64_t runs, std::uint64_t rng_seed) {
    if (horizon < 1) throw ValidationError("mc horizon must be >= 1");
    if (runs < 1) throw ValidationError("mc needs at least one run");
    validate_mode(aug, mode);
    seeds.validate_against(aug);

    std::vector<double> counts(static_cast<std::size_t>(runs));
    #pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t r = 0; r < runs; ++r) {
        CascadeState st = make_cascade_state(aug, seeds, mode, rng_seed,
                                             static_cast<std::uint64_t>(r));
        for (std::int64_t t = 0; t < horizon; ++t) step_binary_inplace(st, aug, mode);
        counts[static_cast<std::size_t>(r)] = static_cast<double>(count_active_original(st, aug));
    }

    McEstimate est;
    est.runs = runs;
    double sum = 0.0;
    for (double c : counts) sum += c;
    est.mean = sum / static_cast<double>(runs);
    double ss = 0.0;
    for (double c : counts) ss += (c - est.mean) * (c - est.mean);
    if (runs > 1)
        est.stderr_ = std::sqrt(ss / static_cast<double>(runs - 1)) /
                      std::sqrt(static_cast<double>(runs));
    return est;
}

} // namespace hcim
