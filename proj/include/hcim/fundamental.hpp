#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <hcim/errors.hpp>
#include <hcim/transition.hpp>

namespace hcim {

/// Lowest-index interior node with no path to any boundary node, if one
/// exists. Found by reverse BFS from the directly-escaping interior rows.
inline std::optional<NodeIndex> find_trapped_node(const TransitionSystem& ts) {
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    if (m == 0) return std::nullopt;
    std::vector<char> escapes(static_cast<std::size_t>(m), 0);
    std::vector<std::int64_t> stack;
    for (std::int64_t i = 0; i < m; ++i) {
        if (ts.B_block().outerIndexPtr()[i + 1] > ts.B_block().outerIndexPtr()[i]) {
            escapes[static_cast<std::size_t>(i)] = 1;
            stack.push_back(i);
        }
    }
    // in-adjacency of R
    std::vector<std::vector<std::int64_t>> in_adj(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i)
        for (SparseRowMatrix::InnerIterator it(ts.R(), i); it; ++it)
            in_adj[static_cast<std::size_t>(it.col())].push_back(i);
    while (!stack.empty()) {
        const std::int64_t j = stack.back();
        stack.pop_back();
        for (std::int64_t i : in_adj[static_cast<std::size_t>(j)]) {
            if (!escapes[static_cast<std::size_t>(i)]) {
                escapes[static_cast<std::size_t>(i)] = 1;
                stack.push_back(i);
            }
        }
    }
    for (std::int64_t i = 0; i < m; ++i)
        if (!escapes[static_cast<std::size_t>(i)]) return ts.interior_node(i);
    return std::nullopt;
}

inline void require_boundary_reachable(const TransitionSystem& ts) {
    if (const auto trapped = find_trapped_node(ts)) {
        throw SingularSystemError(
            "interior node " + std::to_string(*trapped) +
                " cannot reach any boundary node; (I - R) is singular",
            *trapped);
    }
}

/// F = (I - R)^{-1} for the interior block of a seed-conditioned transition
/// system. The dense backend holds the full matrix (plus its diagonal and
/// column sums) and supports the Schur-complement rank-1 seed update; the
/// Neumann backend holds only the diagonal and column sums of the truncated
/// series I + R + ... + R^T.
class FundamentalMatrix {
public:
    FundamentalMatrix() = default;

    bool is_dense() const { return T_ < 0; }
    /// Truncation order of the Neumann backend; -1 for dense.
    std::int64_t truncation() const { return T_; }
    std::string backend_name() const {
        return is_dense() ? "dense_exact" : "neumann:" + std::to_string(T_);
    }
    const SeedSet& seed_context() const { return seed_context_; }

    std::int64_t active_count() const { return m_; }
    bool is_active(NodeIndex global) const {
        return global >= 0 && global < static_cast<NodeIndex>(pos_.size()) &&
               pos_[static_cast<std::size_t>(global)] >= 0 &&
               pos_[static_cast<std::size_t>(global)] < m_;
    }
    /// Active interior nodes in ascending global order.
    std::vector<NodeIndex> active_nodes() const {
        std::vector<NodeIndex> out(nodes_.begin(), nodes_.begin() + m_);
        std::sort(out.begin(), out.end());
        return out;
    }

    double entry(NodeIndex i, NodeIndex j) const {
        require_dense();
        return F_(checked_pos(i), checked_pos(j));
    }
    double diag_at(NodeIndex i) const {
        const std::int64_t p = checked_pos(i);
        return is_dense() ? F_(p, p) : diag_[static_cast<std::size_t>(p)];
    }
    double colsum_at(NodeIndex j) const {
        const std::int64_t p = checked_pos(j);
        if (is_dense()) return F_.col(p).head(m_).sum();
        return colsum_[static_cast<std::size_t>(p)];
    }

    /// Column F(:, s) over the active block, in internal local order.
    /// Pair with node_at() to map positions back to global indices.
    Eigen::VectorXd column(NodeIndex s) const {
        require_dense();
        return F_.col(checked_pos(s)).head(m_);
    }
    NodeIndex node_at(std::int64_t local) const { return nodes_[static_cast<std::size_t>(local)]; }
    std::int64_t local_of(NodeIndex global) const { return checked_pos(global); }

    /// Active block. Row/column `local_of(v)` corresponds to node v.
    Eigen::Block<const Eigen::MatrixXd> matrix() const {
        require_dense();
        return F_.topLeftCorner(m_, m_);
    }

    /// Lemma-1 seed absorption in place: F' = F - F(:,s) F(s,:) / F(s,s) on
    /// the remaining interior, with s masked afterwards.
    void absorb_seed(NodeIndex s) {
        require_dense();
        const std::int64_t ls = checked_pos(s);
        const std::int64_t last = m_ - 1;
        if (F_(ls, ls) <= 0.0)
            throw ValidationError("fundamental diagonal must be positive at the new seed");
        if (ls != last) swap_local(ls, last);
        const double pivot = F_(last, last);
        if (last > 0) {
            F_.topLeftCorner(last, last).noalias() -=
                (F_.col(last).head(last) * F_.row(last).head(last)) / pivot;
        }
        m_ = last;
        seed_context_ = seed_context_.with(s);
    }

    Eigen::VectorXd diag_vector() const {
        if (is_dense()) return F_.diagonal().head(m_);
        return Eigen::Map<const Eigen::VectorXd>(diag_.data(), m_);
    }
    Eigen::VectorXd colsum_vector() const {
        if (is_dense()) return F_.topLeftCorner(m_, m_).colwise().sum().transpose();
        return Eigen::Map<const Eigen::VectorXd>(colsum_.data(), m_);
    }

    friend FundamentalMatrix compute_fundamental_dense(const TransitionSystem& ts);
    friend FundamentalMatrix compute_fundamental_neumann(const TransitionSystem& ts,
                                                         std::int64_t T);

private:
    void require_dense() const {
        if (!is_dense())
            throw ValidationError("operation requires the dense fundamental-matrix backend");
    }
    std::int64_t checked_pos(NodeIndex global) const {
        if (!is_active(global))
            throw ValidationError("node " + std::to_string(global) +
                                  " is not an active interior node of this fundamental matrix");
        return pos_[static_cast<std::size_t>(global)];
    }
    void swap_local(std::int64_t a, std::int64_t b) {
        F_.row(a).swap(F_.row(b));
        F_.col(a).swap(F_.col(b));
        std::swap(nodes_[static_cast<std::size_t>(a)], nodes_[static_cast<std::size_t>(b)]);
        pos_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(a)])] = a;
        pos_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(b)])] = b;
    }

    Eigen::MatrixXd F_;           // dense backend; leading m_ x m_ block is live
    std::vector<double> diag_;    // neumann backend
    std::vector<double> colsum_;  // neumann backend
    std::vector<NodeIndex> nodes_;       // local -> global
    std::vector<std::int64_t> pos_;      // global -> local (-1 outside)
    std::int64_t m_ = 0;
    std::int64_t T_ = -1;
    SeedSet seed_context_;
};

inline FundamentalMatrix compute_fundamental_dense(const TransitionSystem& ts) {
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    if (m == 0) throw ValidationError("fundamental matrix needs a nonempty interior");
    require_boundary_reachable(ts);

    FundamentalMatrix out;
    out.T_ = -1;
    out.m_ = m;
    out.seed_context_ = ts.seeds();
    out.nodes_ = ts.interior();
    out.pos_.assign(static_cast<std::size_t>(ts.n()), -1);
    for (std::int64_t l = 0; l < m; ++l)
        out.pos_[static_cast<std::size_t>(out.nodes_[static_cast<std::size_t>(l)])] = l;

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd(ts.R());
    out.F_ = Eigen::PartialPivLU<Eigen::MatrixXd>(std::move(A))
                 .solve(Eigen::MatrixXd::Identity(m, m));
    return out;
}

/// Diagonal and column sums of I + R + ... + R^T.
///
/// Column sums accumulate T row-vector products with R. The diagonal
/// accumulates closed-walk weights per node by meeting in the middle:
/// (R^k)_jj is the dot product of the depth-ceil(k/2) outgoing expansion and
/// the depth-floor(k/2) incoming expansion at j, so only walks of half depth
/// are ever expanded.
inline FundamentalMatrix compute_fundamental_neumann(const TransitionSystem& ts,
                                                     std::int64_t T) {
    if (T < 0) throw ValidationError("neumann truncation must be >= 0");
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    if (m == 0) throw ValidationError("fundamental matrix needs a nonempty interior");

    FundamentalMatrix out;
    out.T_ = T;
    out.m_ = m;
    out.seed_context_ = ts.seeds();
    out.nodes_ = ts.interior();
    out.pos_.assign(static_cast<std::size_t>(ts.n()), -1);
    for (std::int64_t l = 0; l < m; ++l)
        out.pos_[static_cast<std::size_t>(out.nodes_[static_cast<std::size_t>(l)])] = l;

    const SparseRowMatrix& R = ts.R();

    // colsum(F)_j = sum_k (1' R^k)_j
    Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd acc = x;
    for (std::int64_t k = 1; k <= T; ++k) {
        x = R.transpose() * x;
        acc += x;
    }
    out.colsum_.assign(acc.data(), acc.data() + m);

    // diag(F)_j via bidirectional truncated walk expansion. R has a zero
    // diagonal (no self-loops), so k = 1 contributes nothing and expansions
    // are only needed once T >= 2.
    out.diag_.assign(static_cast<std::size_t>(m), 1.0); // k = 0 term
    if (T >= 2) {
        const std::int64_t depth_out = (T + 1) / 2; // ceil(T/2)
        const std::int64_t depth_in = T / 2;
        Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t> Rc = R;

        #pragma omp parallel
        {
            std::vector<std::vector<std::int64_t>> u_idx(
                static_cast<std::size_t>(depth_out) + 1);
            std::vector<std::vector<std::int64_t>> w_idx(
                static_cast<std::size_t>(depth_in) + 1);
            std::vector<std::vector<double>> u_val(
                static_cast<std::size_t>(depth_out) + 1,
                std::vector<double>(static_cast<std::size_t>(m), 0.0));
            std::vector<std::vector<double>> w_val(
                static_cast<std::size_t>(depth_in) + 1,
                std::vector<double>(static_cast<std::size_t>(m), 0.0));

            #pragma omp for schedule(dynamic, 64)
            for (std::int64_t j = 0; j < m; ++j) {
                u_idx[0].assign(1, j);
                u_val[0][static_cast<std::size_t>(j)] = 1.0;
                w_idx[0].assign(1, j);
                w_val[0][static_cast<std::size_t>(j)] = 1.0;

                // outgoing expansion u_a(i) = (R^a)_{ji}
                for (std::int64_t a = 1; a <= depth_out; ++a) {
                    auto& next_idx = u_idx[static_cast<std::size_t>(a)];
                    auto& next_val = u_val[static_cast<std::size_t>(a)];
                    next_idx.clear();
                    for (std::int64_t i : u_idx[static_cast<std::size_t>(a - 1)]) {
                        const double v = u_val[static_cast<std::size_t>(a - 1)]
                                              [static_cast<std::size_t>(i)];
                        for (SparseRowMatrix::InnerIterator it(R, i); it; ++it) {
                            auto& slot = next_val[static_cast<std::size_t>(it.col())];
                            if (slot == 0.0) next_idx.push_back(it.col());
                            slot += v * it.value();
                        }
                    }
                }
                // incoming expansion w_b(i) = (R^b)_{ij}
                for (std::int64_t b = 1; b <= depth_in; ++b) {
                    auto& next_idx = w_idx[static_cast<std::size_t>(b)];
                    auto& next_val = w_val[static_cast<std::size_t>(b)];
                    next_idx.clear();
                    for (std::int64_t i : w_idx[static_cast<std::size_t>(b - 1)]) {
                        const double v = w_val[static_cast<std::size_t>(b - 1)]
                                              [static_cast<std::size_t>(i)];
                        for (Eigen::SparseMatrix<double, Eigen::ColMajor,
                                                 std::int64_t>::InnerIterator it(Rc, i);
                             it; ++it) {
                            auto& slot = next_val[static_cast<std::size_t>(it.row())];
                            if (slot == 0.0) next_idx.push_back(it.row());
                            slot += v * it.value();
                        }
                    }
                }

                double d = 1.0; // k = 0
                for (std::int64_t k = 1; k <= T; ++k) {
                    const std::int64_t a = (k + 1) / 2;
                    const std::int64_t b = k / 2;
                    const auto& ui = u_idx[static_cast<std::size_t>(a)];
                    const auto& wi = w_idx[static_cast<std::size_t>(b)];
                    double dot = 0.0;
                    if (ui.size() <= wi.size()) {
                        const auto& uv = u_val[static_cast<std::size_t>(a)];
                        const auto& wv = w_val[static_cast<std::size_t>(b)];
                        for (std::int64_t i : ui)
                            dot += uv[static_cast<std::size_t>(i)] *
                                   wv[static_cast<std::size_t>(i)];
                    } else {
                        const auto& uv = u_val[static_cast<std::size_t>(a)];
                        const auto& wv = w_val[static_cast<std::size_t>(b)];
                        for (std::int64_t i : wi)
                            dot += uv[static_cast<std::size_t>(i)] *
                                   wv[static_cast<std::size_t>(i)];
                    }
                    d += dot;
                }
                out.diag_[static_cast<std::size_t>(j)] = d;

                for (std::size_t a = 0; a < u_idx.size(); ++a) {
                    for (std::int64_t i : u_idx[a]) u_val[a][static_cast<std::size_t>(i)] = 0.0;
                    u_idx[a].clear();
                }
                for (std::size_t b = 0; b < w_idx.size(); ++b) {
                    for (std::int64_t i : w_idx[b]) w_val[b][static_cast<std::size_t>(i)] = 0.0;
                    w_idx[b].clear();
                }
            }
        }
    }
    return out;
}

/// Lemma-1 rank-1 update as a value operation: the fundamental matrix for
/// seed_context + {s}, with row and column s masked.
inline FundamentalMatrix update_fundamental_rank1(const FundamentalMatrix& F, NodeIndex s) {
    if (!F.is_dense())
        throw ValidationError(
            "rank-1 update requires the dense backend; recompute the Neumann series instead");
    FundamentalMatrix out = F;
    out.absorb_seed(s);
    return out;
}

/// Interior-to-boundary absorption probabilities Q = F B.
struct AbsorptionMatrix {
    Eigen::MatrixXd Q;                  // interiors x boundary
    std::vector<NodeIndex> row_nodes;   // interior global indices
    std::vector<NodeIndex> col_nodes;   // boundary global indices

    double at(NodeIndex interior, NodeIndex boundary) const {
        const auto r = std::find(row_nodes.begin(), row_nodes.end(), interior);
        const auto c = std::find(col_nodes.begin(), col_nodes.end(), boundary);
        if (r == row_nodes.end() || c == col_nodes.end())
            throw ValidationError("absorption entry outside the interior x boundary grid");
        return Q(r - row_nodes.begin(), c - col_nodes.begin());
    }
};

inline AbsorptionMatrix absorption_from_fundamental(const FundamentalMatrix& F,
                                                    const TransitionSystem& ts) {
    if (!F.is_dense())
        throw ValidationError("absorption matrix requires the dense backend");
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    if (F.active_count() != m)
        throw ValidationError("fundamental matrix and transition system shapes differ");
    Eigen::MatrixXd Ford(m, m);
    for (std::int64_t a = 0; a < m; ++a) {
        const std::int64_t fa = F.local_of(ts.interior_node(a));
        for (std::int64_t b = 0; b < m; ++b)
            Ford(a, b) = F.matrix()(fa, F.local_of(ts.interior_node(b)));
    }
    AbsorptionMatrix out;
    out.Q = Ford * Eigen::MatrixXd(ts.B_block());
    out.row_nodes = ts.interior();
    out.col_nodes = ts.boundary();
    return out;
}

/// Lemma-3 shortcut: the absorption column toward a prospective seed s,
/// Q^{S u {s}}_{is} = F^S_{is} / F^S_{ss}, without updating F.
inline Eigen::VectorXd absorption_column_for_new_seed(const FundamentalMatrix& F, NodeIndex s) {
    Eigen::VectorXd col = F.column(s);
    return col / F.diag_at(s);
}

} // namespace hcim
