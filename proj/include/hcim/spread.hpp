#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/fundamental.hpp>
#include <hcim/generators.hpp>
#include <hcim/network.hpp>
#include <hcim/transition.hpp>

namespace hcim {

/// Interior count up to which the exact dense solve is the default.
inline constexpr std::int64_t kDenseInteriorThreshold = 10000;

struct BackendSpec {
    enum class Kind { dense, neumann, auto_select };
    Kind kind = Kind::auto_select;
    std::int64_t T = -1; // neumann truncation

    static BackendSpec dense() { return {Kind::dense, -1}; }
    static BackendSpec neumann(std::int64_t T) { return {Kind::neumann, T}; }
    static BackendSpec auto_select() { return {Kind::auto_select, -1}; }

    static BackendSpec parse(const std::string& s) {
        if (s == "dense") return dense();
        if (s == "auto") return auto_select();
        if (s.rfind("neumann:", 0) == 0) {
            try {
                return neumann(std::stoll(s.substr(8)));
            } catch (const std::exception&) {
                throw ConfigError("cannot parse neumann truncation in `" + s + "`");
            }
        }
        throw ConfigError("unknown backend `" + s + "` (expected dense, neumann:T, or auto)");
    }
    std::string to_string() const {
        switch (kind) {
            case Kind::dense: return "dense";
            case Kind::neumann: return "neumann:" + std::to_string(T);
            case Kind::auto_select: return "auto";
        }
        return "?";
    }
};

/// Effective diameter of the original (pre-bias) topology, used as the
/// automatic Neumann truncation order.
inline std::int64_t effective_diameter_of(const AugmentedNetwork& aug,
                                          std::int64_t sample_size = 256,
                                          double quantile = 0.9, std::uint64_t seed = 1) {
    std::vector<Edge> edges;
    for (NodeIndex i = 0; i < aug.n_raw(); ++i) {
        auto [first, last] = aug.out_edges(i);
        for (const Edge* e = first; e != last; ++e)
            if (e->weight > 0.0) edges.push_back(*e);
    }
    Network topo(aug.n_raw(), std::move(edges));
    return estimate_effective_diameter(topo, sample_size, quantile, seed);
}

/// A BackendSpec with auto resolved against the network size.
inline BackendSpec resolve_backend(const BackendSpec& spec, const AugmentedNetwork& aug) {
    if (spec.kind != BackendSpec::Kind::auto_select) return spec;
    if (aug.n_raw() <= kDenseInteriorThreshold) return BackendSpec::dense();
    return BackendSpec::neumann(std::max<std::int64_t>(1, effective_diameter_of(aug)));
}

/// Infinite-horizon adoption probabilities for a seed-conditioned system.
struct SteadyState {
    Eigen::VectorXd v;   // length n (bias node last)
    SeedSet seed_context;
    double sigma = 0.0;  // sum of v over original nodes
};

/// Solves the harmonic system v_I = R v_I + B v_B with v_B = 1 at seeds and
/// b at the bias node. Uses the dense LU path up to the dense threshold and
/// a Jacobi fixed-point iteration (machine-precision stop) beyond it.
inline SteadyState steady_state(const TransitionSystem& ts, double b) {
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    const auto nb = static_cast<std::int64_t>(ts.boundary().size());

    SteadyState out;
    out.seed_context = ts.seeds();
    out.v = Eigen::VectorXd::Zero(ts.n());
    for (NodeIndex s : ts.seeds().members()) out.v[s] = 1.0;
    out.v[ts.bias_index()] = b;

    if (m > 0) {
        require_boundary_reachable(ts);
        Eigen::VectorXd vb = Eigen::VectorXd::Zero(nb);
        for (std::int64_t c = 0; c + 1 < nb; ++c) vb[c] = 1.0; // seeds
        vb[nb - 1] = b;                                        // bias column is last
        const Eigen::VectorXd rhs = ts.B_block() * vb;

        Eigen::VectorXd x;
        if (m <= kDenseInteriorThreshold) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd(ts.R());
            x = Eigen::PartialPivLU<Eigen::MatrixXd>(std::move(A)).solve(rhs);
        } else {
            x = Eigen::VectorXd::Zero(m);
            Eigen::VectorXd next(m);
            for (std::int64_t iter = 0; iter < 1000000; ++iter) {
                next = ts.R() * x + rhs;
                const double delta = (next - x).lpNorm<Eigen::Infinity>();
                x.swap(next);
                if (delta < 1e-13) break;
            }
        }
        for (std::int64_t l = 0; l < m; ++l) out.v[ts.interior_node(l)] = x[l];
    }

    double sigma = 0.0;
    for (NodeIndex i = 0; i + 1 < ts.n(); ++i) sigma += out.v[i];
    out.sigma = sigma;
    return out;
}

/// Closed-form influence spread sigma(S, infinity) with bias value 0:
/// |S| plus the total absorption mass the seeds capture from the interior.
/// The Neumann backend reports the truncated-series value.
inline double influence_spread(const AugmentedNetwork& aug, const SeedSet& seeds,
                               const BackendSpec& backend = BackendSpec::auto_select()) {
    seeds.validate_against(aug);
    if (seeds.empty()) return 0.0;
    if (seeds.size() == static_cast<std::size_t>(aug.n_raw()))
        return static_cast<double>(aug.n_raw());

    const BackendSpec resolved = resolve_backend(backend, aug);
    const TransitionSystem ts = build_transition_system(aug, seeds);

    if (resolved.kind == BackendSpec::Kind::dense) {
        return steady_state(ts, 0.0).sigma;
    }

    // sigma = |S| + 1' (sum_k R^k) (B vb) with vb = 1 at seed columns.
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    const auto nb = static_cast<std::int64_t>(ts.boundary().size());
    Eigen::VectorXd vb = Eigen::VectorXd::Zero(nb);
    for (std::int64_t c = 0; c + 1 < nb; ++c) vb[c] = 1.0;
    const Eigen::VectorXd y = ts.B_block() * vb;
    Eigen::VectorXd z = y;
    for (std::int64_t k = 0; k < resolved.T; ++k) z = ts.R() * z + y;
    return static_cast<double>(seeds.size()) + z.sum();
}

} // namespace hcim
