#pragma once

#include <Eigen/Dense>

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/fundamental.hpp>
#include <hcim/network.hpp>
#include <hcim/simulate.hpp>
#include <hcim/spread.hpp>
#include <hcim/transition.hpp>

namespace hcim {

struct GreedyStep {
    NodeIndex seed = -1;
    double marginal_gain = 0.0;
    double sigma_after = 0.0;
    double elapsed_ms = 0.0;
    std::int64_t evals = 0; // spread evaluations consumed by this step
};

struct GreedyTrace {
    std::vector<GreedyStep> steps;
    std::string algorithm;
    std::string backend;

    SeedSet seed_set() const { return seed_prefix(steps.size()); }
    SeedSet seed_prefix(std::size_t k) const {
        std::vector<NodeIndex> m;
        for (std::size_t i = 0; i < k && i < steps.size(); ++i) m.push_back(steps[i].seed);
        return SeedSet(std::move(m));
    }
    std::int64_t total_evals() const {
        std::int64_t e = 0;
        for (const auto& s : steps) e += s.evals;
        return e;
    }
    double total_elapsed_ms() const {
        double e = 0.0;
        for (const auto& s : steps) e += s.elapsed_ms;
        return e;
    }
};

struct BoundReport {
    double online_bound = 0.0;
    double offline_bound = 0.0;
    double achieved_sigma = 0.0;
    double ratio = 0.0;
};

namespace detail {

inline double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// argmax over candidate scores with lowest-index tie-breaking; candidates
/// iterated in ascending node order.
struct ArgmaxTracker {
    NodeIndex best = -1;
    double best_score = -1.0;
    void offer(NodeIndex node, double score) {
        if (best < 0 || score > best_score) {
            best = node;
            best_score = score;
        }
    }
};

} // namespace detail

/// Highest-spread single node: argmax over s of sum_i F_is / F_ss on the
/// seedless system. Ties break toward the lowest node index.
inline NodeIndex most_influential(const AugmentedNetwork& aug,
                                  const BackendSpec& backend = BackendSpec::auto_select()) {
    if (aug.n_raw() < 1) throw ValidationError("network has no nodes");
    const BackendSpec resolved = resolve_backend(backend, aug);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{});
    const FundamentalMatrix F = resolved.kind == BackendSpec::Kind::dense
                                    ? compute_fundamental_dense(ts)
                                    : compute_fundamental_neumann(ts, resolved.T);
    detail::ArgmaxTracker argmax;
    for (NodeIndex s = 0; s < aug.n_raw(); ++s)
        argmax.offer(s, F.colsum_at(s) / F.diag_at(s));
    return argmax.best;
}

/// Greedy seed selection with closed-form spread and closed-form marginal
/// gains. Maintains the steady-state vector v by superposition and scores
/// every candidate s as (1 - v(s)) * colsum(F̆)(s); the dense backend applies
/// the rank-1 seed update between steps, the Neumann backend recomputes its
/// truncated diagonal/column sums on the reduced system.
inline GreedyTrace c2greedy(const AugmentedNetwork& aug, std::int64_t K,
                            const BackendSpec& backend = BackendSpec::auto_select(),
                            std::vector<Eigen::VectorXd>* v_history = nullptr) {
    if (K < 1 || K > aug.n_raw())
        throw ValidationError("seed budget K must lie in [1, n_raw]");
    const BackendSpec resolved = resolve_backend(backend, aug);

    GreedyTrace trace;
    trace.algorithm = "c2greedy";
    trace.backend = resolved.to_string();

    Eigen::VectorXd v = Eigen::VectorXd::Zero(aug.n_raw());
    double sigma = 0.0;

    if (resolved.kind == BackendSpec::Kind::dense) {
        FundamentalMatrix F =
            compute_fundamental_dense(build_transition_system(aug, SeedSet{}));
        for (std::int64_t k = 0; k < K; ++k) {
            const double t0 = detail::now_ms();
            const Eigen::VectorXd colsum = F.colsum_vector();
            const Eigen::VectorXd diag = F.diag_vector();

            detail::ArgmaxTracker argmax;
            for (NodeIndex s = 0; s < aug.n_raw(); ++s) {
                if (!F.is_active(s)) continue;
                const std::int64_t l = F.local_of(s);
                argmax.offer(s, (1.0 - v[s]) * colsum[l] / diag[l]);
            }
            const NodeIndex s = argmax.best;
            const double gain = argmax.best_score;

            const Eigen::VectorXd col = F.column(s);
            const double pivot = F.diag_at(s);
            const double scale = (1.0 - v[s]) / pivot;
            for (std::int64_t l = 0; l < F.active_count(); ++l)
                v[F.node_at(l)] += scale * col[l];

            sigma += gain;
            if (k + 1 < K) F.absorb_seed(s);
            trace.steps.push_back({s, gain, sigma, detail::now_ms() - t0, 0});
            if (v_history) v_history->push_back(v);
        }
        return trace;
    }

    SeedSet seeds;
    for (std::int64_t k = 0; k < K; ++k) {
        const double t0 = detail::now_ms();
        const TransitionSystem ts = build_transition_system(aug, seeds);
        const FundamentalMatrix F = compute_fundamental_neumann(ts, resolved.T);

        detail::ArgmaxTracker argmax;
        for (NodeIndex s : ts.interior())
            argmax.offer(s, (1.0 - v[s]) * F.colsum_at(s) / F.diag_at(s));
        const NodeIndex s = argmax.best;
        const double gain = argmax.best_score;

        // Column of the truncated series toward s via Horner's scheme.
        const auto m = static_cast<std::int64_t>(ts.interior().size());
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[ts.interior_pos(s)] = 1.0;
        Eigen::VectorXd col = e;
        for (std::int64_t j = 0; j < resolved.T; ++j) col = ts.R() * col + e;
        const double scale = (1.0 - v[s]) / F.diag_at(s);
        for (std::int64_t l = 0; l < m; ++l) v[ts.interior_node(l)] += scale * col[l];

        sigma += gain;
        seeds = seeds.with(s);
        trace.steps.push_back({s, gain, sigma, detail::now_ms() - t0, 0});
        if (v_history) v_history->push_back(v);
    }
    return trace;
}

enum class McVariant { plain, lazy, c1, lazy_c1 };

inline const char* to_string(McVariant v) {
    switch (v) {
        case McVariant::plain: return "greedy";
        case McVariant::lazy: return "lazygreedy";
        case McVariant::c1: return "c1greedy";
        case McVariant::lazy_c1: return "lazyc1greedy";
    }
    return "?";
}

struct McGreedyOptions {
    std::int64_t runs = 10000;    // ignored by the c1 variants
    std::int64_t horizon = 0;     // 0 = 10x effective diameter
    std::uint64_t rng_seed = 0;
};

/// Greedy seed selection with per-candidate spread evaluation: Monte Carlo
/// estimates (plain/lazy) or the closed form (c1/lazy_c1), optionally with
/// the lazy priority-queue re-evaluation rule that submodularity licenses.
inline GreedyTrace mc_greedy(const AugmentedNetwork& aug, std::int64_t K, McVariant variant,
                             const McGreedyOptions& opts = {}) {
    if (K < 1 || K > aug.n_raw())
        throw ValidationError("seed budget K must lie in [1, n_raw]");
    const bool monte_carlo = variant == McVariant::plain || variant == McVariant::lazy;
    if (monte_carlo && opts.runs < 1) throw ValidationError("mc greedy needs runs >= 1");
    const bool lazy = variant == McVariant::lazy || variant == McVariant::lazy_c1;

    std::int64_t horizon = opts.horizon;
    if (monte_carlo && horizon <= 0)
        horizon = std::max<std::int64_t>(1, 10 * effective_diameter_of(aug));

    std::int64_t eval_counter = 0;
    auto evaluate = [&](const SeedSet& set) -> double {
        ++eval_counter;
        if (monte_carlo) {
            const std::uint64_t key = opts.rng_seed + 0x9E3779B97F4A7C15ULL *
                                                          static_cast<std::uint64_t>(eval_counter);
            return mc_spread_estimate(aug, set, ModelMode::hc(), horizon, opts.runs, key).mean;
        }
        return influence_spread(aug, set, BackendSpec::dense());
    };

    GreedyTrace trace;
    trace.algorithm = to_string(variant);
    trace.backend = monte_carlo ? "mc:" + std::to_string(opts.runs) : "dense";

    SeedSet seeds;
    double sigma_base = 0.0;

    if (!lazy) {
        for (std::int64_t k = 0; k < K; ++k) {
            const double t0 = detail::now_ms();
            const std::int64_t evals_before = eval_counter;
            detail::ArgmaxTracker argmax;
            for (NodeIndex s = 0; s < aug.n_raw(); ++s) {
                if (seeds.contains(s)) continue;
                argmax.offer(s, evaluate(seeds.with(s)) - sigma_base);
            }
            seeds = seeds.with(argmax.best);
            sigma_base += argmax.best_score;
            trace.steps.push_back({argmax.best, argmax.best_score, sigma_base,
                                   detail::now_ms() - t0, eval_counter - evals_before});
        }
        return trace;
    }

    // CELF: keep stale gains in a max-heap; only the top is re-evaluated.
    struct Item {
        double gain;
        NodeIndex node;
        std::int64_t updated_at;
    };
    struct Cmp {
        bool operator()(const Item& a, const Item& b) const {
            if (a.gain != b.gain) return a.gain < b.gain;
            return a.node > b.node; // lower index wins ties
        }
    };
    std::priority_queue<Item, std::vector<Item>, Cmp> queue;

    {
        const double t0 = detail::now_ms();
        for (NodeIndex s = 0; s < aug.n_raw(); ++s)
            queue.push({evaluate(SeedSet{}.with(s)), s, 0});
        const Item first = queue.top();
        queue.pop();
        seeds = seeds.with(first.node);
        sigma_base = first.gain;
        trace.steps.push_back(
            {first.node, first.gain, first.gain, detail::now_ms() - t0, eval_counter});
    }
    for (std::int64_t k = 1; k < K; ++k) {
        const double t0 = detail::now_ms();
        const std::int64_t evals_before = eval_counter;
        for (;;) {
            Item top = queue.top();
            queue.pop();
            if (top.updated_at == k) {
                seeds = seeds.with(top.node);
                sigma_base += top.gain;
                trace.steps.push_back({top.node, top.gain, sigma_base,
                                       detail::now_ms() - t0, eval_counter - evals_before});
                break;
            }
            top.gain = evaluate(seeds.with(top.node)) - sigma_base;
            top.updated_at = k;
            queue.push(top);
        }
    }
    return trace;
}

/// Exhaustive optimum over all K-subsets; ties resolve to the
/// lexicographically first subset.
inline std::pair<SeedSet, double> brute_force(const AugmentedNetwork& aug, std::int64_t K,
                                              std::int64_t cap = 1000000) {
    if (K < 1 || K > aug.n_raw())
        throw ValidationError("seed budget K must lie in [1, n_raw]");
    double combos = 1.0;
    for (std::int64_t i = 0; i < K; ++i)
        combos *= static_cast<double>(aug.n_raw() - i) / static_cast<double>(i + 1);
    if (combos > static_cast<double>(cap))
        throw CapacityError("brute force over " + std::to_string(static_cast<long long>(combos)) +
                            " subsets exceeds the cap; lower K or the network size");

    std::vector<std::vector<NodeIndex>> subsets;
    subsets.reserve(static_cast<std::size_t>(combos) + 1);
    std::vector<NodeIndex> current(static_cast<std::size_t>(K));
    // lexicographic enumeration of K-combinations
    std::function<void(NodeIndex, std::int64_t)> rec = [&](NodeIndex start, std::int64_t depth) {
        if (depth == K) {
            subsets.push_back(current);
            return;
        }
        for (NodeIndex i = start; i <= aug.n_raw() - (K - depth); ++i) {
            current[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);

    std::vector<double> sigma(subsets.size());
    #pragma omp parallel for schedule(dynamic, 32)
    for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(subsets.size()); ++idx)
        sigma[static_cast<std::size_t>(idx)] =
            influence_spread(aug, SeedSet(subsets[static_cast<std::size_t>(idx)]),
                             BackendSpec::dense());

    std::size_t best = 0;
    for (std::size_t i = 1; i < subsets.size(); ++i)
        if (sigma[i] > sigma[best]) best = i;
    return {SeedSet(subsets[best]), sigma[best]};
}

/// Closed-form marginal gains of all non-members at the given seed set.
inline std::vector<std::pair<NodeIndex, double>> marginal_gains_at(const AugmentedNetwork& aug,
                                                                   const SeedSet& seeds) {
    const TransitionSystem ts = build_transition_system(aug, seeds);
    const FundamentalMatrix F = compute_fundamental_dense(ts);
    const SteadyState st = steady_state(ts, 0.0);
    std::vector<std::pair<NodeIndex, double>> gains;
    gains.reserve(ts.interior().size());
    for (NodeIndex s : ts.interior())
        gains.emplace_back(s, (1.0 - st.v[s]) * F.colsum_at(s) / F.diag_at(s));
    return gains;
}

/// Data-dependent optimality bounds for a selector's final seed set:
/// online = sigma(S_K) plus the K largest closed-form marginal gains at S_K;
/// offline = the K largest marginal gains at the empty set.
inline BoundReport online_bound(const AugmentedNetwork& aug, const GreedyTrace& trace) {
    const SeedSet seeds = trace.seed_set();
    const auto K = static_cast<std::int64_t>(seeds.size());
    BoundReport report;
    report.achieved_sigma = influence_spread(aug, seeds, BackendSpec::dense());

    auto top_k_sum = [K](std::vector<std::pair<NodeIndex, double>> gains) {
        std::vector<double> g;
        g.reserve(gains.size());
        for (const auto& [node, gain] : gains) g.push_back(gain);
        std::sort(g.begin(), g.end(), std::greater<double>());
        double sum = 0.0;
        for (std::int64_t i = 0; i < K && i < static_cast<std::int64_t>(g.size()); ++i)
            sum += g[static_cast<std::size_t>(i)];
        return sum;
    };

    report.online_bound =
        report.achieved_sigma +
        (seeds.size() == static_cast<std::size_t>(aug.n_raw())
             ? 0.0
             : top_k_sum(marginal_gains_at(aug, seeds)));
    report.offline_bound = top_k_sum(marginal_gains_at(aug, SeedSet{}));
    report.ratio = report.online_bound > 0.0 ? report.achieved_sigma / report.online_bound : 1.0;
    return report;
}

enum class BaselineMethod { degree, pagerank, random };

inline const char* to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::degree: return "degree";
        case BaselineMethod::pagerank: return "pagerank";
        case BaselineMethod::random: return "random";
    }
    return "?";
}

/// Full preference order of a baseline selector (used for k-prefixes).
/// degree: weighted in-degree on the follower graph, so followers count
/// toward the influencer they trust. pagerank: power iteration along the
/// trust edges, damping 0.85, L1 convergence 1e-10. random: uniform order.
inline std::vector<NodeIndex> baseline_ranking(const AugmentedNetwork& aug, std::int64_t K,
                                               BaselineMethod method, std::uint64_t rng_seed) {
    if (K < 1 || K > aug.n_raw())
        throw ValidationError("seed budget K must lie in [1, n_raw]");
    const NodeIndex n = aug.n_raw();
    std::vector<NodeIndex> order;

    switch (method) {
        case BaselineMethod::degree: {
            std::vector<double> indeg(static_cast<std::size_t>(n), 0.0);
            for (NodeIndex i = 0; i < n; ++i) {
                auto [first, last] = aug.out_edges(i);
                for (const Edge* e = first; e != last; ++e)
                    indeg[static_cast<std::size_t>(e->dst)] += e->weight;
            }
            order.resize(static_cast<std::size_t>(n));
            for (NodeIndex i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
            std::stable_sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
                return indeg[static_cast<std::size_t>(a)] > indeg[static_cast<std::size_t>(b)];
            });
            break;
        }
        case BaselineMethod::pagerank: {
            constexpr double kDamping = 0.85;
            Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
            Eigen::VectorXd next(n);
            for (int iter = 0; iter < 100000; ++iter) {
                next.setZero();
                double dangling_mass = 0.0;
                for (NodeIndex i = 0; i < n; ++i) {
                    auto [first, last] = aug.out_edges(i);
                    if (first == last) {
                        dangling_mass += x[i];
                        continue;
                    }
                    double row = 0.0;
                    for (const Edge* e = first; e != last; ++e) row += e->weight;
                    for (const Edge* e = first; e != last; ++e)
                        next[e->dst] += x[i] * (e->weight / row);
                }
                const double teleport =
                    (1.0 - kDamping) / static_cast<double>(n) +
                    kDamping * dangling_mass / static_cast<double>(n);
                next = kDamping * next;
                next.array() += teleport;
                const double delta = (next - x).lpNorm<1>();
                x.swap(next);
                if (delta < 1e-10) break;
            }
            order.resize(static_cast<std::size_t>(n));
            for (NodeIndex i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](NodeIndex a, NodeIndex b) { return x[a] > x[b]; });
            break;
        }
        case BaselineMethod::random: {
            Philox4x64 gen(rng_seed);
            order.resize(static_cast<std::size_t>(n));
            for (NodeIndex i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
            for (std::int64_t k = 0; k < K; ++k) {
                const auto pick = k + static_cast<std::int64_t>(
                                          uniform_below(gen, static_cast<std::uint64_t>(n - k)));
                std::swap(order[static_cast<std::size_t>(k)],
                          order[static_cast<std::size_t>(pick)]);
            }
            break;
        }
    }
    order.resize(static_cast<std::size_t>(K));
    return order;
}

inline SeedSet baseline_select(const AugmentedNetwork& aug, std::int64_t K,
                               BaselineMethod method, std::uint64_t rng_seed = 0) {
    return SeedSet(baseline_ranking(aug, K, method, rng_seed));
}

} // namespace hcim
