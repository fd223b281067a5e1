#pragma once

#include <Eigen/Sparse>

#include <vector>

#include <hcim/errors.hpp>
#include <hcim/network.hpp>

namespace hcim {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/// Row-stochastic transition matrix of the bias-augmented network with the
/// boundary rows (seeds and bias) replaced by identity rows, partitioned as
///
///     P = [ R  B ]
///         [ 0  I ]
///
/// R: interior-to-interior, B: interior-to-boundary, both in a stable local
/// ordering (interior and boundary node indices ascending; the bias node is
/// always last in the boundary since it carries the largest index).
class TransitionSystem {
public:
    TransitionSystem() = default;

    NodeIndex n() const { return n_; }
    NodeIndex bias_index() const { return n_ - 1; }
    const SeedSet& seeds() const { return seeds_; }
    double bias_value() const { return bias_value_; }

    const std::vector<NodeIndex>& interior() const { return interior_; }
    const std::vector<NodeIndex>& boundary() const { return boundary_; }

    /// Local interior position of a global node index, or -1.
    std::int64_t interior_pos(NodeIndex global) const {
        return interior_pos_[static_cast<std::size_t>(global)];
    }
    NodeIndex interior_node(std::int64_t local) const {
        return interior_[static_cast<std::size_t>(local)];
    }

    const SparseRowMatrix& P() const { return P_; }
    const SparseRowMatrix& R() const { return R_; }
    const SparseRowMatrix& B_block() const { return B_; }

    friend TransitionSystem build_transition_system(const AugmentedNetwork& aug,
                                                    const SeedSet& seeds);

private:
    NodeIndex n_ = 0;
    SeedSet seeds_;
    double bias_value_ = 0.0;
    std::vector<NodeIndex> interior_, boundary_;
    std::vector<std::int64_t> interior_pos_, boundary_pos_;
    SparseRowMatrix P_, R_, B_;
};

inline TransitionSystem build_transition_system(const AugmentedNetwork& aug,
                                                const SeedSet& seeds) {
    seeds.validate_against(aug);
    TransitionSystem ts;
    ts.n_ = aug.n();
    ts.seeds_ = seeds;
    ts.bias_value_ = aug.bias_value();

    const NodeIndex n = aug.n();
    ts.interior_pos_.assign(static_cast<std::size_t>(n), -1);
    ts.boundary_pos_.assign(static_cast<std::size_t>(n), -1);
    for (NodeIndex i = 0; i < aug.n_raw(); ++i) {
        if (!seeds.contains(i)) {
            ts.interior_pos_[static_cast<std::size_t>(i)] =
                static_cast<std::int64_t>(ts.interior_.size());
            ts.interior_.push_back(i);
        }
    }
    for (NodeIndex s : seeds.members()) {
        ts.boundary_pos_[static_cast<std::size_t>(s)] =
            static_cast<std::int64_t>(ts.boundary_.size());
        ts.boundary_.push_back(s);
    }
    ts.boundary_pos_[static_cast<std::size_t>(aug.bias_index())] =
        static_cast<std::int64_t>(ts.boundary_.size());
    ts.boundary_.push_back(aug.bias_index());

    using Triplet = Eigen::Triplet<double, std::int64_t>;
    std::vector<Triplet> p_trip, r_trip, b_trip;
    p_trip.reserve(aug.n_raw() * 2);
    for (NodeIndex i = 0; i < aug.n_raw(); ++i) {
        if (seeds.contains(i)) {
            p_trip.emplace_back(i, i, 1.0);
            continue;
        }
        const std::int64_t li = ts.interior_pos_[static_cast<std::size_t>(i)];
        auto [first, last] = aug.out_edges(i);
        for (const Edge* e = first; e != last; ++e) {
            if (e->weight == 0.0) continue;
            p_trip.emplace_back(i, e->dst, e->weight);
            const std::int64_t lj = ts.interior_pos_[static_cast<std::size_t>(e->dst)];
            if (lj >= 0)
                r_trip.emplace_back(li, lj, e->weight);
            else
                b_trip.emplace_back(li, ts.boundary_pos_[static_cast<std::size_t>(e->dst)],
                                    e->weight);
        }
        const double bw = aug.bias_weight(i);
        if (bw > 0.0) {
            p_trip.emplace_back(i, aug.bias_index(), bw);
            b_trip.emplace_back(li, ts.boundary_pos_[static_cast<std::size_t>(aug.bias_index())],
                                bw);
        }
    }
    p_trip.emplace_back(aug.bias_index(), aug.bias_index(), 1.0);

    const auto m = static_cast<std::int64_t>(ts.interior_.size());
    const auto nb = static_cast<std::int64_t>(ts.boundary_.size());
    ts.P_.resize(n, n);
    ts.P_.setFromTriplets(p_trip.begin(), p_trip.end());
    ts.R_.resize(m, m);
    ts.R_.setFromTriplets(r_trip.begin(), r_trip.end());
    ts.B_.resize(m, nb);
    ts.B_.setFromTriplets(b_trip.begin(), b_trip.end());
    return ts;
}

} // namespace hcim
