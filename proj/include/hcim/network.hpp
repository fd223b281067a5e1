#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/rng.hpp>

namespace hcim {

using NodeIndex = std::int64_t;

struct Edge {
    NodeIndex src = 0; // follower
    NodeIndex dst = 0; // influencer: src trusts dst by `weight`
    double weight = 0.0;
};

enum class Weighting { explicit_weights, uniform_random, inverse_out_degree, weighted_cascade };

inline const char* to_string(Weighting w) {
    switch (w) {
        case Weighting::explicit_weights: return "explicit";
        case Weighting::uniform_random: return "uniform_random";
        case Weighting::inverse_out_degree: return "inverse_out_degree";
        case Weighting::weighted_cascade: return "weighted_cascade";
    }
    return "?";
}

inline Weighting weighting_from_string(const std::string& s) {
    if (s == "explicit") return Weighting::explicit_weights;
    if (s == "uniform_random") return Weighting::uniform_random;
    if (s == "inverse_out_degree") return Weighting::inverse_out_degree;
    if (s == "weighted_cascade") return Weighting::weighted_cascade;
    throw ConfigError("unknown weighting scheme: " + s);
}

/// Directed influence network. Edge (src, dst) means src follows dst and
/// trusts it by the edge weight. Carries per-node bias strength beta and the
/// optional media/reluctance factors of the general diffusion rule.
class Network {
public:
    Network() = default;

    /// Validates and takes ownership of an edge list. Edges are stored
    /// sorted by (src, dst); duplicates and self-loops are rejected.
    Network(NodeIndex n_raw, std::vector<Edge> edges) : n_raw_(n_raw) {
        if (n_raw < 0) throw ValidationError("node count must be nonnegative");
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const Edge& ed = edges[e];
            if (ed.src < 0 || ed.src >= n_raw || ed.dst < 0 || ed.dst >= n_raw)
                throw ValidationError("edge endpoint out of range: " +
                                      std::to_string(ed.src) + " -> " + std::to_string(ed.dst));
            if (ed.src == ed.dst)
                throw ValidationError("self-loop at node " + std::to_string(ed.src));
            if (!(ed.weight >= 0.0) || !std::isfinite(ed.weight))
                throw ValidationError("edge weight must be finite and nonnegative");
            if (e > 0 && edges[e - 1].src == ed.src && edges[e - 1].dst == ed.dst)
                throw ValidationError("duplicate edge " + std::to_string(ed.src) + " -> " +
                                      std::to_string(ed.dst));
        }
        edges_ = std::move(edges);
        offsets_.assign(static_cast<std::size_t>(n_raw) + 1, 0);
        for (const Edge& ed : edges_) offsets_[static_cast<std::size_t>(ed.src) + 1]++;
        for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
        beta_.assign(static_cast<std::size_t>(n_raw), 0.1);
    }

    NodeIndex n_raw() const { return n_raw_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Out-edges of node i as a contiguous slice of the sorted edge list.
    std::pair<const Edge*, const Edge*> out_edges(NodeIndex i) const {
        return {edges_.data() + offsets_[static_cast<std::size_t>(i)],
                edges_.data() + offsets_[static_cast<std::size_t>(i) + 1]};
    }
    std::int64_t out_degree(NodeIndex i) const {
        return static_cast<std::int64_t>(offsets_[static_cast<std::size_t>(i) + 1] -
                                         offsets_[static_cast<std::size_t>(i)]);
    }

    double beta(NodeIndex i) const { return beta_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& beta() const { return beta_; }
    void set_beta_uniform(double b) {
        if (!(b >= 0.0 && b < 1.0)) throw ValidationError("beta must lie in [0,1)");
        std::fill(beta_.begin(), beta_.end(), b);
    }
    void set_beta(std::vector<double> b) {
        if (static_cast<NodeIndex>(b.size()) != n_raw_)
            throw ValidationError("beta vector length must equal node count");
        for (double v : b)
            if (!(v >= 0.0 && v < 1.0)) throw ValidationError("beta must lie in [0,1)");
        beta_ = std::move(b);
    }

    double media_m() const { return media_m_; }
    double reluctance_r() const { return reluctance_r_; }
    void set_media_reluctance(double m, double r) {
        if (!(m >= 0.0 && m <= 1.0) || !(r >= 0.0 && r <= 1.0))
            throw ValidationError("media and reluctance factors must lie in [0,1]");
        media_m_ = m;
        reluctance_r_ = r;
    }

    /// General-rule factors; defaults are alpha_i = beta_i, gamma_i = 0.
    double alpha(NodeIndex i) const {
        return alpha_.empty() ? beta_[static_cast<std::size_t>(i)]
                              : alpha_[static_cast<std::size_t>(i)];
    }
    double gamma(NodeIndex i) const {
        return gamma_.empty() ? 0.0 : gamma_[static_cast<std::size_t>(i)];
    }
    void set_alpha_gamma(std::vector<double> alpha, std::vector<double> gamma) {
        if (static_cast<NodeIndex>(alpha.size()) != n_raw_ ||
            static_cast<NodeIndex>(gamma.size()) != n_raw_)
            throw ValidationError("alpha/gamma vectors must match node count");
        for (NodeIndex i = 0; i < n_raw_; ++i) {
            const double a = alpha[static_cast<std::size_t>(i)];
            const double g = gamma[static_cast<std::size_t>(i)];
            if (a < 0.0 || g < 0.0 || a + g > 1.0 + 1e-12)
                throw ValidationError("alpha_i + gamma_i must lie in [0,1]");
        }
        alpha_ = std::move(alpha);
        gamma_ = std::move(gamma);
    }

    /// Original node labels; identity unless the edge list used strings.
    const std::vector<std::string>& labels() const { return labels_; }
    void set_labels(std::vector<std::string> labels) { labels_ = std::move(labels); }
    std::string label(NodeIndex i) const {
        return labels_.empty() ? std::to_string(i) : labels_[static_cast<std::size_t>(i)];
    }

private:
    NodeIndex n_raw_ = 0;
    std::vector<Edge> edges_;       // sorted by (src, dst)
    std::vector<std::size_t> offsets_{0};
    std::vector<double> beta_;
    std::vector<double> alpha_, gamma_; // empty => defaults
    double media_m_ = 1.0;
    double reluctance_r_ = 0.0;
    std::vector<std::string> labels_; // empty => identity
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(line);
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline bool parse_index(const std::string& tok, NodeIndex& out) {
    if (tok.empty()) return false;
    for (char c : tok)
        if (c < '0' || c > '9') return false;
    errno = 0;
    out = std::strtoll(tok.c_str(), nullptr, 10);
    return errno == 0;
}

} // namespace detail

/// Reads a tab- or space-separated edge list `src dst [weight]`.
/// Lines starting with '#' are comments. If every endpoint token is a
/// nonnegative integer the tokens are used as node indices directly;
/// otherwise tokens become labels mapped to dense indices in order of first
/// appearance. The weight column is required exactly when
/// weighting == explicit_weights.
inline Network load_edge_list(const std::string& path, Weighting weighting,
                              std::uint64_t rng_seed = 0) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list: " + path);

    struct RawEdge {
        std::string src, dst;
        double weight;
    };
    std::vector<RawEdge> raw;
    bool all_numeric = true;
    const bool want_weight = (weighting == Weighting::explicit_weights);

    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        if (want_weight && toks.size() != 3)
            throw ParseError("expected `src dst weight`", lineno);
        if (!want_weight && toks.size() != 2)
            throw ParseError("expected `src dst` (no weight column for scheme " +
                                 std::string(to_string(weighting)) + ")",
                             lineno);
        double w = 0.0;
        if (want_weight) {
            try {
                std::size_t used = 0;
                w = std::stod(toks[2], &used);
                if (used != toks[2].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError("cannot parse weight `" + toks[2] + "`", lineno);
            }
            if (!std::isfinite(w)) throw ParseError("weight must be finite", lineno);
            if (w < 0.0) throw ValidationError("negative weight at line " + std::to_string(lineno));
        }
        NodeIndex tmp;
        all_numeric = all_numeric && detail::parse_index(toks[0], tmp) &&
                      detail::parse_index(toks[1], tmp);
        raw.push_back({toks[0], toks[1], w});
    }

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    std::vector<std::string> labels;
    NodeIndex n_raw = 0;
    if (all_numeric) {
        for (const RawEdge& r : raw) {
            NodeIndex s, d;
            detail::parse_index(r.src, s);
            detail::parse_index(r.dst, d);
            edges.push_back({s, d, r.weight});
            n_raw = std::max({n_raw, s + 1, d + 1});
        }
    } else {
        std::unordered_map<std::string, NodeIndex> ids;
        auto intern = [&](const std::string& tok) {
            auto [it, inserted] = ids.emplace(tok, static_cast<NodeIndex>(labels.size()));
            if (inserted) labels.push_back(tok);
            return it->second;
        };
        for (const RawEdge& r : raw) edges.push_back({intern(r.src), intern(r.dst), r.weight});
        n_raw = static_cast<NodeIndex>(labels.size());
    }

    Network net(n_raw, std::move(edges));
    if (!labels.empty()) net.set_labels(std::move(labels));

    switch (weighting) {
        case Weighting::explicit_weights:
            break;
        case Weighting::uniform_random: {
            Philox4x64 gen(rng_seed);
            std::vector<Edge> reweighted = net.edges();
            for (Edge& e : reweighted) e.weight = uniform01(gen);
            std::vector<double> row_sum(static_cast<std::size_t>(n_raw), 0.0);
            for (const Edge& e : reweighted) row_sum[static_cast<std::size_t>(e.src)] += e.weight;
            for (Edge& e : reweighted) {
                const double s = row_sum[static_cast<std::size_t>(e.src)];
                if (s > 0.0) e.weight /= s;
            }
            Network out(n_raw, std::move(reweighted));
            out.set_labels(std::vector<std::string>(net.labels()));
            return out;
        }
        case Weighting::inverse_out_degree: {
            std::vector<Edge> reweighted = net.edges();
            for (Edge& e : reweighted)
                e.weight = 1.0 / static_cast<double>(net.out_degree(e.src));
            Network out(n_raw, std::move(reweighted));
            out.set_labels(std::vector<std::string>(net.labels()));
            return out;
        }
        case Weighting::weighted_cascade: {
            std::vector<double> in_deg(static_cast<std::size_t>(n_raw), 0.0);
            for (const Edge& e : net.edges()) in_deg[static_cast<std::size_t>(e.dst)] += 1.0;
            std::vector<Edge> reweighted = net.edges();
            for (Edge& e : reweighted) e.weight = 1.0 / in_deg[static_cast<std::size_t>(e.dst)];
            Network out(n_raw, std::move(reweighted));
            out.set_labels(std::vector<std::string>(net.labels()));
            return out;
        }
    }
    return net;
}

/// Writes `src<TAB>dst<TAB>weight` with round-trip-exact doubles.
inline void save_edge_list(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write edge list: " + path);
    char buf[64];
    for (const Edge& e : net.edges()) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
        out << e.src << '\t' << e.dst << '\t' << buf << '\n';
    }
}

/// Writes the optional `index label` sidecar table.
inline void save_label_table(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write label table: " + path);
    for (NodeIndex i = 0; i < net.n_raw(); ++i) out << i << '\t' << net.label(i) << '\n';
}

/// The network extended with the bias node. Every original node's outgoing
/// mass is renormalized to 1, scaled by (1 - beta_i), and completed with a
/// bias edge of weight beta_i; a node without outgoing weight gets a single
/// bias edge of weight 1. The bias node has no outgoing edges.
class AugmentedNetwork {
public:
    static constexpr double kRowSumTol = 1e-12;

    AugmentedNetwork() = default;

    NodeIndex n() const { return n_raw_ + 1; }
    NodeIndex n_raw() const { return n_raw_; }
    NodeIndex bias_index() const { return n_raw_; }
    double bias_value() const { return bias_value_; }

    /// Neighbor slice (dst, weight) of original node i, bias edge excluded.
    std::pair<const Edge*, const Edge*> out_edges(NodeIndex i) const {
        return {edges_.data() + offsets_[static_cast<std::size_t>(i)],
                edges_.data() + offsets_[static_cast<std::size_t>(i) + 1]};
    }
    double bias_weight(NodeIndex i) const { return bias_weight_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& bias_weight() const { return bias_weight_; }

    double beta(NodeIndex i) const { return beta_[static_cast<std::size_t>(i)]; }
    double alpha(NodeIndex i) const { return alpha_[static_cast<std::size_t>(i)]; }
    double gamma(NodeIndex i) const { return gamma_[static_cast<std::size_t>(i)]; }
    double media_m() const { return media_m_; }
    double reluctance_r() const { return reluctance_r_; }
    std::string label(NodeIndex i) const {
        if (i == bias_index()) return "bias";
        return labels_.empty() ? std::to_string(i) : labels_[static_cast<std::size_t>(i)];
    }
    const std::vector<std::string>& labels() const { return labels_; }

    friend AugmentedNetwork augment_with_bias(const Network& net, double b);

private:
    NodeIndex n_raw_ = 0;
    double bias_value_ = 0.0;
    std::vector<Edge> edges_; // normalized, sorted by (src, dst)
    std::vector<std::size_t> offsets_{0};
    std::vector<double> bias_weight_;
    std::vector<double> beta_, alpha_, gamma_;
    double media_m_ = 1.0, reluctance_r_ = 0.0;
    std::vector<std::string> labels_;
};

inline AugmentedNetwork augment_with_bias(const Network& net, double b) {
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("bias value b must lie in [0,1]");
    AugmentedNetwork aug;
    aug.n_raw_ = net.n_raw();
    aug.bias_value_ = b;
    aug.beta_ = net.beta();
    aug.media_m_ = net.media_m();
    aug.reluctance_r_ = net.reluctance_r();
    aug.labels_ = net.labels();
    aug.alpha_.resize(static_cast<std::size_t>(net.n_raw()));
    aug.gamma_.resize(static_cast<std::size_t>(net.n_raw()));
    for (NodeIndex i = 0; i < net.n_raw(); ++i) {
        aug.alpha_[static_cast<std::size_t>(i)] = net.alpha(i);
        aug.gamma_[static_cast<std::size_t>(i)] = net.gamma(i);
    }

    aug.offsets_.assign(static_cast<std::size_t>(net.n_raw()) + 1, 0);
    aug.bias_weight_.assign(static_cast<std::size_t>(net.n_raw()), 0.0);
    aug.edges_.reserve(net.edges().size());
    for (NodeIndex i = 0; i < net.n_raw(); ++i) {
        auto [first, last] = net.out_edges(i);
        double row = 0.0;
        for (const Edge* e = first; e != last; ++e) row += e->weight;
        if (row <= 0.0) {
            // Dangling node: all mass goes to the bias node.
            aug.bias_weight_[static_cast<std::size_t>(i)] = 1.0;
        } else {
            const double beta_i = net.beta(i);
            for (const Edge* e = first; e != last; ++e)
                aug.edges_.push_back({i, e->dst, (1.0 - beta_i) * (e->weight / row)});
            aug.bias_weight_[static_cast<std::size_t>(i)] = beta_i;
        }
        aug.offsets_[static_cast<std::size_t>(i) + 1] = aug.edges_.size();
    }

    for (NodeIndex i = 0; i < net.n_raw(); ++i) {
        auto [first, last] = aug.out_edges(i);
        double row = aug.bias_weight_[static_cast<std::size_t>(i)];
        for (const Edge* e = first; e != last; ++e) row += e->weight;
        if (std::abs(row - 1.0) > AugmentedNetwork::kRowSumTol)
            throw ValidationError("augmented row " + std::to_string(i) +
                                  " does not sum to 1");
    }
    return aug;
}

/// Distinct original-node indices, kept sorted. The bias node is never a
/// member.
class SeedSet {
public:
    SeedSet() = default;
    explicit SeedSet(std::vector<NodeIndex> members) : members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        for (std::size_t i = 1; i < members_.size(); ++i)
            if (members_[i] == members_[i - 1])
                throw ValidationError("duplicate seed " + std::to_string(members_[i]));
    }

    const std::vector<NodeIndex>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    bool contains(NodeIndex i) const {
        return std::binary_search(members_.begin(), members_.end(), i);
    }

    SeedSet with(NodeIndex s) const {
        std::vector<NodeIndex> m = members_;
        m.push_back(s);
        return SeedSet(std::move(m));
    }

    void validate_against(const AugmentedNetwork& aug) const {
        for (NodeIndex s : members_) {
            if (s == aug.bias_index())
                throw ValidationError("the bias node cannot be a seed");
            if (s < 0 || s >= aug.n_raw())
                throw ValidationError("seed index out of range: " + std::to_string(s));
        }
    }

private:
    std::vector<NodeIndex> members_;
};

} // namespace hcim
