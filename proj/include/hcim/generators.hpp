#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/network.hpp>
#include <hcim/rng.hpp>

namespace hcim {

/// Stochastic Kronecker graph: each potential edge (i, j) of the
/// 2^power-node graph is sampled independently with probability equal to the
/// product of initiator entries selected by the bit decomposition of (i, j).
struct KroneckerSpec {
    std::array<std::array<double, 2>, 2> initiator{{{0.5, 0.5}, {0.5, 0.5}}};
    int power = 1;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (power < 1) throw ValidationError("kronecker power must be >= 1");
        if (power >= 62)
            throw CapacityError("2^" + std::to_string(power) + " nodes overflow the index type");
        for (const auto& row : initiator)
            for (double t : row)
                if (!(t >= 0.0 && t <= 1.0))
                    throw ValidationError("initiator entries must lie in [0,1]");
    }
};

struct ForestFireSpec {
    NodeIndex n_target = 1;
    double p_forward = 0.35;
    double p_backward = 0.25;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (n_target < 1) throw ValidationError("forest fire needs at least one node");
        if (!(p_forward >= 0.0 && p_forward < 1.0) || !(p_backward >= 0.0 && p_backward < 1.0))
            throw ValidationError("burning probabilities must lie in [0,1)");
    }
};

inline Network generate_kronecker(const KroneckerSpec& spec) {
    spec.validate();
    const NodeIndex n = NodeIndex(1) << spec.power;
    // Number of node pairs must stay enumerable.
    if (spec.power > 17)
        throw CapacityError("kronecker power " + std::to_string(spec.power) +
                            " implies " + std::to_string(n) + "^2 candidate edges");
    Philox4x64 gen(spec.rng_seed);
    std::vector<Edge> edges;
    for (NodeIndex i = 0; i < n; ++i) {
        for (NodeIndex j = 0; j < n; ++j) {
            if (i == j) continue;
            double p = 1.0;
            for (int b = 0; b < spec.power; ++b)
                p *= spec.initiator[(i >> b) & 1][(j >> b) & 1];
            if (p > 0.0 && uniform01(gen) < p) edges.push_back({i, j, 0.0});
        }
    }
    // Edge weights drawn U(0,1) and normalized per node.
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    for (Edge& e : edges) {
        e.weight = uniform01(gen);
        row[static_cast<std::size_t>(e.src)] += e.weight;
    }
    for (Edge& e : edges) e.weight /= row[static_cast<std::size_t>(e.src)];
    return Network(n, std::move(edges));
}

/// Forest-fire growth. Each arriving node picks a uniformly random
/// ambassador among existing nodes and burns outward: from every burned
/// node, geometric_count(p_forward) of its unvisited out-neighbors and
/// geometric_count(p_backward) of its unvisited in-neighbors catch fire,
/// recursively and without revisiting. The new node links to every burned
/// node; edge weights are 1/out-degree afterward. With (0.35, 0.25) the
/// realized edge density comes out near 2.5.
inline Network generate_forest_fire(const ForestFireSpec& spec) {
    spec.validate();
    Philox4x64 gen(spec.rng_seed);
    const NodeIndex n = spec.n_target;
    std::vector<std::vector<NodeIndex>> out_adj(static_cast<std::size_t>(n));
    std::vector<std::vector<NodeIndex>> in_adj(static_cast<std::size_t>(n));
    std::vector<std::int64_t> visited_mark(static_cast<std::size_t>(n), -1);
    const double q_fwd = spec.p_forward;
    const double q_bwd = spec.p_backward;

    std::vector<NodeIndex> burned, frontier, candidates;
    for (NodeIndex v = 1; v < n; ++v) {
        const auto ambassador = static_cast<NodeIndex>(uniform_below(gen, v));
        burned.clear();
        frontier.clear();
        visited_mark[static_cast<std::size_t>(v)] = v;
        visited_mark[static_cast<std::size_t>(ambassador)] = v;
        burned.push_back(ambassador);
        frontier.push_back(ambassador);
        while (!frontier.empty()) {
            const NodeIndex w = frontier.back();
            frontier.pop_back();
            for (int dir = 0; dir < 2; ++dir) {
                const auto& neighbors = dir == 0 ? out_adj[static_cast<std::size_t>(w)]
                                                 : in_adj[static_cast<std::size_t>(w)];
                const double q = dir == 0 ? q_fwd : q_bwd;
                candidates.clear();
                for (NodeIndex u : neighbors)
                    if (visited_mark[static_cast<std::size_t>(u)] != v) candidates.push_back(u);
                std::int64_t want = geometric_count(gen, q);
                want = std::min<std::int64_t>(want, static_cast<std::int64_t>(candidates.size()));
                // Partial Fisher-Yates to pick `want` distinct neighbors.
                for (std::int64_t k = 0; k < want; ++k) {
                    const auto pick = k + static_cast<std::int64_t>(uniform_below(
                                              gen, static_cast<std::uint64_t>(
                                                       candidates.size() - k)));
                    std::swap(candidates[static_cast<std::size_t>(k)],
                              candidates[static_cast<std::size_t>(pick)]);
                    const NodeIndex u = candidates[static_cast<std::size_t>(k)];
                    visited_mark[static_cast<std::size_t>(u)] = v;
                    burned.push_back(u);
                    frontier.push_back(u);
                }
            }
        }
        for (NodeIndex u : burned) {
            out_adj[static_cast<std::size_t>(v)].push_back(u);
            in_adj[static_cast<std::size_t>(u)].push_back(v);
        }
    }

    std::vector<Edge> edges;
    for (NodeIndex v = 0; v < n; ++v) {
        const auto& targets = out_adj[static_cast<std::size_t>(v)];
        if (targets.empty()) continue;
        const double w = 1.0 / static_cast<double>(targets.size());
        for (NodeIndex u : targets) edges.push_back({v, u, w});
    }
    return Network(n, std::move(edges));
}

/// Effective diameter: the smallest hop count covering `quantile` of the
/// reachable ordered pairs, estimated by BFS from `sample_size` random
/// sources (all sources when sample_size >= n).
inline std::int64_t estimate_effective_diameter(const Network& net, std::int64_t sample_size,
                                                double quantile = 0.9,
                                                std::uint64_t rng_seed = 0) {
    if (net.n_raw() == 0) throw ValidationError("effective diameter of an empty graph");
    if (!(quantile > 0.0 && quantile <= 1.0))
        throw ValidationError("quantile must lie in (0,1]");
    if (sample_size < 1) throw ValidationError("sample_size must be >= 1");

    const NodeIndex n = net.n_raw();
    std::vector<NodeIndex> sources;
    if (sample_size >= n) {
        sources.resize(static_cast<std::size_t>(n));
        for (NodeIndex i = 0; i < n; ++i) sources[static_cast<std::size_t>(i)] = i;
    } else {
        // Partial Fisher-Yates over the node range.
        Philox4x64 gen(rng_seed);
        std::vector<NodeIndex> pool(static_cast<std::size_t>(n));
        for (NodeIndex i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (std::int64_t k = 0; k < sample_size; ++k) {
            const auto pick = k + static_cast<std::int64_t>(
                                      uniform_below(gen, static_cast<std::uint64_t>(n - k)));
            std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
        }
        pool.resize(static_cast<std::size_t>(sample_size));
        sources = std::move(pool);
    }

    std::vector<std::int64_t> dist_hist; // dist_hist[d] = #pairs at distance d+1
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
    std::vector<NodeIndex> queue_buf(static_cast<std::size_t>(n));
    for (NodeIndex src : sources) {
        std::fill(dist.begin(), dist.end(), -1);
        std::size_t head = 0, tail = 0;
        dist[static_cast<std::size_t>(src)] = 0;
        queue_buf[tail++] = src;
        while (head < tail) {
            const NodeIndex u = queue_buf[head++];
            auto [first, last] = net.out_edges(u);
            for (const Edge* e = first; e != last; ++e) {
                if (dist[static_cast<std::size_t>(e->dst)] != -1) continue;
                const std::int64_t d = dist[static_cast<std::size_t>(u)] + 1;
                dist[static_cast<std::size_t>(e->dst)] = d;
                if (static_cast<std::size_t>(d) > dist_hist.size())
                    dist_hist.resize(static_cast<std::size_t>(d), 0);
                dist_hist[static_cast<std::size_t>(d - 1)]++;
                queue_buf[tail++] = e->dst;
            }
        }
    }

    std::int64_t reachable = 0;
    for (std::int64_t c : dist_hist) reachable += c;
    if (reachable == 0) return 0;
    const double needed = quantile * static_cast<double>(reachable);
    std::int64_t cum = 0;
    for (std::size_t d = 0; d < dist_hist.size(); ++d) {
        cum += dist_hist[d];
        if (static_cast<double>(cum) >= needed) return static_cast<std::int64_t>(d + 1);
    }
    return static_cast<std::int64_t>(dist_hist.size());
}

} // namespace hcim
