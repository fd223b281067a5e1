#include <catch2/catch_amalgamated.hpp>

#include <hcim/fundamental.hpp>
#include <hcim/spread.hpp>

#include "helpers.hpp"

#include <cmath>

using namespace hcim;

namespace {

AugmentedNetwork two_node_aug() {
    return augment_with_bias(testutil::two_node_net(), 0.0);
}

/// Independent reference: accumulate I + R + ... + R^T by explicit dense
/// matrix powers.
Eigen::MatrixXd dense_truncated_series(const TransitionSystem& ts, std::int64_t T) {
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    Eigen::MatrixXd R = Eigen::MatrixXd(ts.R());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
    for (std::int64_t k = 1; k <= T; ++k) {
        power = power * R;
        acc += power;
    }
    return acc;
}

double max_abs_entry_diff(const FundamentalMatrix& a, const FundamentalMatrix& b) {
    double worst = 0.0;
    for (NodeIndex i : a.active_nodes())
        for (NodeIndex j : a.active_nodes())
            worst = std::max(worst, std::abs(a.entry(i, j) - b.entry(i, j)));
    return worst;
}

} // namespace

TEST_CASE("dense fundamental matrix of the 2-interior system", "[spread]") {
    const TransitionSystem ts = build_transition_system(two_node_aug(), SeedSet{});
    const FundamentalMatrix F = compute_fundamental_dense(ts);
    // (I - R)^{-1} = 1/0.19 [[1, 0.9], [0.9, 1]]
    REQUIRE(F.entry(0, 0) == Catch::Approx(5.263158).margin(1e-6));
    REQUIRE(F.entry(0, 1) == Catch::Approx(4.736842).margin(1e-6));
    REQUIRE(F.entry(1, 0) == Catch::Approx(4.736842).margin(1e-6));
    REQUIRE(F.entry(1, 1) == Catch::Approx(5.263158).margin(1e-6));
    REQUIRE(F.backend_name() == "dense_exact");
}

TEST_CASE("dense fundamental degenerate cases", "[spread]") {
    const AugmentedNetwork aug = two_node_aug();
    SECTION("single interior node") {
        const TransitionSystem ts = build_transition_system(aug, SeedSet{{0}});
        const FundamentalMatrix F = compute_fundamental_dense(ts);
        REQUIRE(F.active_count() == 1);
        REQUIRE(F.entry(1, 1) == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("R = 0 gives F = I") {
        Network net(3, {{0, 2, 1.0}, {1, 2, 1.0}});
        net.set_beta_uniform(0.1);
        const AugmentedNetwork a = augment_with_bias(net, 0.0);
        const TransitionSystem ts = build_transition_system(a, SeedSet{{2}});
        const FundamentalMatrix F = compute_fundamental_dense(ts);
        REQUIRE(F.entry(0, 0) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(F.entry(1, 1) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(F.entry(0, 1) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("empty interior is rejected") {
        const TransitionSystem ts = build_transition_system(aug, SeedSet{{0, 1}});
        REQUIRE_THROWS_AS(compute_fundamental_dense(ts), ValidationError);
    }
}

TEST_CASE("unreachable boundary raises a singularity error naming a node", "[spread]") {
    // Nodes 2 and 3 form a 2-cycle that never reaches the boundary when
    // beta = 0 and neither is a seed.
    Network net(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
    net.set_beta_uniform(0.0);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{0}});
    try {
        compute_fundamental_dense(ts);
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        REQUIRE(e.trapped_node() == 2);
    }
}

TEST_CASE("fundamental entries are nonnegative with diagonal >= 1", "[spread]") {
    const Network net = testutil::random_net(80, 0.08, 31);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{5, 17}});
    const FundamentalMatrix F = compute_fundamental_dense(ts);
    for (NodeIndex i : F.active_nodes()) {
        REQUIRE(F.diag_at(i) >= 1.0 - 1e-12);
        for (NodeIndex j : F.active_nodes()) REQUIRE(F.entry(i, j) >= -1e-12);
    }
}

TEST_CASE("F = I + F R within 1e-9 (interior-passage identity)", "[spread]") {
    const Network net = testutil::random_net(60, 0.1, 13);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{3}});
    const FundamentalMatrix F = compute_fundamental_dense(ts);
    const auto m = static_cast<std::int64_t>(ts.interior().size());
    Eigen::MatrixXd Ford(m, m);
    for (std::int64_t a = 0; a < m; ++a)
        for (std::int64_t b = 0; b < m; ++b)
            Ford(a, b) = F.entry(ts.interior_node(a), ts.interior_node(b));
    const Eigen::MatrixXd residual =
        Ford - (Eigen::MatrixXd::Identity(m, m) + Ford * Eigen::MatrixXd(ts.R()));
    REQUIRE(residual.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("neumann accumulator on the 2-interior system", "[spread]") {
    const TransitionSystem ts = build_transition_system(two_node_aug(), SeedSet{});

    SECTION("T = 0 is the identity partial sum") {
        const FundamentalMatrix F = compute_fundamental_neumann(ts, 0);
        REQUIRE(F.diag_at(0) == 1.0);
        REQUIRE(F.diag_at(1) == 1.0);
        REQUIRE(F.colsum_at(0) == 1.0);
        REQUIRE(F.colsum_at(1) == 1.0);
        REQUIRE(F.backend_name() == "neumann:0");
    }
    SECTION("T = 2 accumulates I + R + R^2") {
        const FundamentalMatrix F = compute_fundamental_neumann(ts, 2);
        REQUIRE(F.diag_at(0) == Catch::Approx(1.81).margin(1e-12));
        REQUIRE(F.diag_at(1) == Catch::Approx(1.81).margin(1e-12));
        REQUIRE(F.colsum_at(0) == Catch::Approx(2.71).margin(1e-12));
        REQUIRE(F.colsum_at(1) == Catch::Approx(2.71).margin(1e-12));
    }
    SECTION("truncation error follows the geometric tail") {
        // colsum_T = sum_{k<=T} 0.9^k, so the dense value 10 is approached
        // with tail 0.9^{T+1}/0.1: about 4.6e-2 at T = 50 and below 1e-4
        // only once T >= 109.
        const FundamentalMatrix f50 = compute_fundamental_neumann(ts, 50);
        const double tail50 = std::pow(0.9, 51) / 0.1;
        REQUIRE(std::abs(f50.colsum_at(0) - (10.0 - tail50)) < 1e-10);
        REQUIRE(std::abs(f50.colsum_at(0) - 10.0) < 5e-2);
        const FundamentalMatrix f110 = compute_fundamental_neumann(ts, 110);
        REQUIRE(std::abs(f110.colsum_at(0) - 10.0) < 1e-4);
        REQUIRE(std::abs(f110.colsum_at(1) - 10.0) < 1e-4);
    }
}

TEST_CASE("neumann diag/colsum match explicit dense powers", "[spread]") {
    const Network net = testutil::random_net(40, 0.12, 77);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{2, 8}});
    for (std::int64_t T : {0, 1, 2, 3, 7, 12}) {
        const FundamentalMatrix F = compute_fundamental_neumann(ts, T);
        const Eigen::MatrixXd ref = dense_truncated_series(ts, T);
        for (std::int64_t l = 0; l < static_cast<std::int64_t>(ts.interior().size()); ++l) {
            const NodeIndex g = ts.interior_node(l);
            REQUIRE(F.diag_at(g) == Catch::Approx(ref(l, l)).margin(1e-12));
            REQUIRE(F.colsum_at(g) == Catch::Approx(ref.col(l).sum()).margin(1e-12));
        }
    }
}

TEST_CASE("neumann values are nondecreasing in T and converge to dense", "[spread]") {
    const Network net = testutil::random_net(30, 0.15, 3);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{1}});
    const FundamentalMatrix dense = compute_fundamental_dense(ts);

    Eigen::VectorXd prev_diag, prev_colsum;
    for (std::int64_t T = 0; T <= 200; T += 10) {
        const FundamentalMatrix F = compute_fundamental_neumann(ts, T);
        const Eigen::VectorXd d = F.diag_vector();
        const Eigen::VectorXd c = F.colsum_vector();
        if (prev_diag.size() > 0) {
            REQUIRE(((d - prev_diag).array() >= -1e-15).all());
            REQUIRE(((c - prev_colsum).array() >= -1e-15).all());
        }
        prev_diag = d;
        prev_colsum = c;
    }
    const FundamentalMatrix F = compute_fundamental_neumann(ts, 2000);
    for (NodeIndex g : dense.active_nodes()) {
        REQUIRE(F.diag_at(g) == Catch::Approx(dense.diag_at(g)).margin(1e-9));
        REQUIRE(F.colsum_at(g) == Catch::Approx(dense.colsum_at(g)).margin(1e-9));
    }
}

TEST_CASE("rank-1 update reproduces the reduced dense solve on the 2-interior system",
          "[spread]") {
    const AugmentedNetwork aug = two_node_aug();
    const TransitionSystem ts = build_transition_system(aug, SeedSet{});
    const FundamentalMatrix F = compute_fundamental_dense(ts);
    const FundamentalMatrix F0 = update_fundamental_rank1(F, 0);
    REQUIRE(F0.entry(1, 1) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(F0.seed_context().members() == std::vector<NodeIndex>{0});

    SECTION("masked row reads fail") {
        REQUIRE_THROWS_AS(F0.entry(0, 1), ValidationError);
        REQUIRE_THROWS_AS(F0.diag_at(0), ValidationError);
    }
    SECTION("neumann backend refuses the update") {
        const FundamentalMatrix N = compute_fundamental_neumann(ts, 5);
        REQUIRE_THROWS_AS(update_fundamental_rank1(N, 0), ValidationError);
    }
}

TEST_CASE("iterated rank-1 updates match fresh dense solves", "[spread][slow]") {
    const Network net = testutil::random_net(200, 0.04, 404);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    Philox4x64 gen(9);

    FundamentalMatrix updated =
        compute_fundamental_dense(build_transition_system(aug, SeedSet{}));
    SeedSet seeds;
    for (int step = 0; step < 5; ++step) {
        const auto active = updated.active_nodes();
        const NodeIndex s = active[uniform_below(gen, active.size())];
        updated = update_fundamental_rank1(updated, s);
        seeds = seeds.with(s);
        const FundamentalMatrix fresh =
            compute_fundamental_dense(build_transition_system(aug, seeds));
        REQUIRE(max_abs_entry_diff(updated, fresh) < 1e-9);
    }
}

TEST_CASE("absorption probabilities Q = F B", "[spread]") {
    const AugmentedNetwork aug = two_node_aug();

    SECTION("no seeds: all mass absorbs at the bias node") {
        const TransitionSystem ts = build_transition_system(aug, SeedSet{});
        const AbsorptionMatrix Q =
            absorption_from_fundamental(compute_fundamental_dense(ts), ts);
        REQUIRE(Q.at(0, 2) == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(Q.at(1, 2) == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("seed 0 captures 0.9 of node 1") {
        const TransitionSystem ts = build_transition_system(aug, SeedSet{{0}});
        const AbsorptionMatrix Q =
            absorption_from_fundamental(compute_fundamental_dense(ts), ts);
        REQUIRE(Q.at(1, 0) == Catch::Approx(0.9).margin(1e-12));
        REQUIRE(Q.at(1, 2) == Catch::Approx(0.1).margin(1e-12));
    }
    SECTION("shape mismatch is rejected") {
        const TransitionSystem empty_seeds = build_transition_system(aug, SeedSet{});
        const TransitionSystem seeded = build_transition_system(aug, SeedSet{{0}});
        const FundamentalMatrix F = compute_fundamental_dense(empty_seeds);
        REQUIRE_THROWS_AS(absorption_from_fundamental(F, seeded), ValidationError);
    }
}

TEST_CASE("Q rows are stochastic when the boundary is reachable", "[spread]") {
    const Network net = testutil::random_net(70, 0.09, 55);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{4, 31}});
    const AbsorptionMatrix Q = absorption_from_fundamental(compute_fundamental_dense(ts), ts);
    const Eigen::VectorXd row_sums = Q.Q.rowwise().sum();
    for (std::int64_t i = 0; i < row_sums.size(); ++i)
        REQUIRE(row_sums[i] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("single-seed absorption shortcut agrees with Q = F B", "[spread][slow]") {
    const Network net = testutil::random_net(200, 0.04, 606);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const SeedSet base{{10, 40}};
    const TransitionSystem ts = build_transition_system(aug, base);
    const FundamentalMatrix F = compute_fundamental_dense(ts);

    Philox4x64 gen(12);
    for (int trial = 0; trial < 3; ++trial) {
        const auto active = F.active_nodes();
        const NodeIndex s = active[uniform_below(gen, active.size())];
        const Eigen::VectorXd shortcut = absorption_column_for_new_seed(F, s);

        const SeedSet grown = base.with(s);
        const TransitionSystem ts2 = build_transition_system(aug, grown);
        const AbsorptionMatrix Q =
            absorption_from_fundamental(compute_fundamental_dense(ts2), ts2);
        for (NodeIndex i : F.active_nodes()) {
            if (i == s) continue;
            REQUIRE(shortcut[F.local_of(i)] == Catch::Approx(Q.at(i, s)).margin(1e-9));
        }
    }
}

TEST_CASE("steady state of the 2-interior system", "[spread]") {
    const AugmentedNetwork aug = two_node_aug();

    SECTION("seed 0") {
        const SteadyState st = steady_state(build_transition_system(aug, SeedSet{{0}}), 0.0);
        REQUIRE(st.v[0] == 1.0);
        REQUIRE(st.v[1] == Catch::Approx(0.9).margin(1e-12));
        REQUIRE(st.v[2] == 0.0);
        REQUIRE(st.sigma == Catch::Approx(1.9).margin(1e-12));
    }
    SECTION("all nodes seeded") {
        const SteadyState st = steady_state(build_transition_system(aug, SeedSet{{0, 1}}), 0.0);
        REQUIRE(st.sigma == 2.0);
    }
    SECTION("no seeds, b = 0") {
        const SteadyState st = steady_state(build_transition_system(aug, SeedSet{}), 0.0);
        REQUIRE(st.sigma == 0.0);
        REQUIRE(st.v.maxCoeff() == 0.0);
    }
    SECTION("no seeds, b = 1 floods the network") {
        const SteadyState st = steady_state(build_transition_system(aug, SeedSet{}), 1.0);
        REQUIRE(st.v[0] == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(st.v[1] == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("steady states are harmonic on interiors and bounded", "[spread]") {
    const Network net = testutil::random_net(90, 0.07, 41);
    const AugmentedNetwork aug = augment_with_bias(net, 0.25);
    const TransitionSystem ts = build_transition_system(aug, SeedSet{{7, 20, 66}});
    const SteadyState st = steady_state(ts, aug.bias_value());
    const Eigen::VectorXd Pv = ts.P() * st.v;
    for (NodeIndex i : ts.interior()) {
        REQUIRE(std::abs(Pv[i] - st.v[i]) < 1e-9);
        REQUIRE(st.v[i] >= -1e-12);
        REQUIRE(st.v[i] <= 1.0 + 1e-12);
    }
    REQUIRE(st.v[ts.bias_index()] == 0.25);
}

TEST_CASE("influence spread on the 2-interior system", "[spread]") {
    const AugmentedNetwork aug = two_node_aug();
    REQUIRE(influence_spread(aug, SeedSet{{0}}, BackendSpec::dense()) ==
            Catch::Approx(1.9).margin(1e-12));
    REQUIRE(influence_spread(aug, SeedSet{{0, 1}}, BackendSpec::dense()) == 2.0);
    REQUIRE(influence_spread(aug, SeedSet{}, BackendSpec::dense()) == 0.0);
}

TEST_CASE("neumann influence spread approaches the dense value", "[spread]") {
    const Network net = testutil::random_net(50, 0.1, 23);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    const SeedSet seeds{{3, 9, 30}};
    const double exact = influence_spread(aug, seeds, BackendSpec::dense());
    double prev = 0.0;
    for (std::int64_t T : {0, 2, 5, 10, 50, 400}) {
        const double approx = influence_spread(aug, seeds, BackendSpec::neumann(T));
        REQUIRE(approx >= prev - 1e-12);
        REQUIRE(approx <= exact + 1e-9);
        prev = approx;
    }
    REQUIRE(prev == Catch::Approx(exact).margin(1e-9));
}

TEST_CASE("spread is monotone and submodular on sampled sets", "[spread][slow]") {
    const Network net = testutil::random_net(60, 0.08, 17);
    const AugmentedNetwork aug = augment_with_bias(net, 0.0);
    Philox4x64 gen(31);

    for (int trial = 0; trial < 40; ++trial) {
        // T subset of S, s outside S
        std::vector<NodeIndex> pool;
        for (NodeIndex i = 0; i < net.n_raw(); ++i) pool.push_back(i);
        for (int k = 0; k < 8; ++k)
            std::swap(pool[k], pool[k + uniform_below(gen, pool.size() - k)]);
        const std::vector<NodeIndex> big(pool.begin(), pool.begin() + 5);
        const std::vector<NodeIndex> small(big.begin(), big.begin() + 2);
        const NodeIndex s = pool[5];

        const SeedSet S(big), T(small);
        const double sig_S = influence_spread(aug, S, BackendSpec::dense());
        const double sig_T = influence_spread(aug, T, BackendSpec::dense());
        const double sig_Ss = influence_spread(aug, S.with(s), BackendSpec::dense());
        const double sig_Ts = influence_spread(aug, T.with(s), BackendSpec::dense());

        REQUIRE(sig_Ss >= sig_S - 1e-9);           // monotone
        REQUIRE(sig_Ts >= sig_T - 1e-9);
        REQUIRE(sig_Ts - sig_T >= sig_Ss - sig_S - 1e-9); // diminishing returns
    }
}
