#include <gtest/gtest.h>

#include "dscm/fixtures.hpp"
#include "dscm/stat_tests.hpp"

using namespace dscm;

namespace {

constexpr std::string_view independent_pair = R"(system {
  exogenous B1: brownian;
  exogenous B2: brownian;
  exogenous clock: time;
  process U { init = normal(0, 1); alpha = {U}; beta = {clock, B1}; g = [-U, 1]; markov = true; }
  process V { init = normal(0, 1); alpha = {V}; beta = {clock, B2}; g = [-V, 1]; markov = true; }
  horizon 1;
})";

PathEnsemble run(std::string_view text, std::size_t paths, std::uint64_t seed, double dt = 0.05) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.n_paths = paths;
    cfg.seed = seed;
    cfg.retain_drivers = false;
    return simulate(parse_model(text), cfg);
}

}  // namespace

TEST(FisherZ, ExactCovariances) {
    // A -> B -> C with unit noise: cov = [[1,1,1],[1,2,2],[1,2,3]].
    Eigen::MatrixXd cov(3, 3);
    cov << 1, 1, 1, 1, 2, 2, 1, 2, 3;
    const auto [z0, p0] = fisher_z(cov, 1000, 0, 2, {1});
    EXPECT_NEAR(z0, 0.0, 1e-9);
    EXPECT_NEAR(p0, 1.0, 1e-9);
    const auto [z1, p1] = fisher_z(cov, 1000, 0, 2, {});
    EXPECT_NEAR(z1, std::atanh(1.0 / std::sqrt(3.0)) * std::sqrt(997.0), 1e-9);
    EXPECT_LT(p1, 1e-12);
}

TEST(FisherZ, SingularAndUndersizedInputsThrow) {
    Eigen::MatrixXd cov(3, 3);
    cov << 1, 1, 0, 1, 1, 0, 0, 0, 1;
    EXPECT_THROW(fisher_z(cov, 100, 0, 2, {1}), NumericalError);
    EXPECT_THROW(fisher_z(Eigen::MatrixXd::Identity(3, 3), 4, 0, 1, {2}), NumericalError);
}

TEST(CiTest, NullCalibration) {
    // Independent processes: rejections at alpha = 0.05 follow Binomial(300, 0.05),
    // mean 15 and standard deviation 3.8.
    std::size_t rejections = 0;
    for (std::uint64_t r = 0; r < 300; ++r) {
        const auto ens = run(independent_pair, 300, r);
        if (!ci_test(ens, {{"U", 1.0}}, {{"V", 1.0}}, {}, 0.05).independent) ++rejections;
    }
    EXPECT_GE(rejections, 4u);
    EXPECT_LE(rejections, 28u);
}

TEST(CiTest, IndependentInitialValues) {
    std::size_t rejections = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto ens = run(fixtures::chain, 500, r);
        // Initial values are independent draws.
        if (!ci_test(ens, {{"Y1", 0.0}}, {{"Y3", 0.0}}, {}, 0.05).independent) ++rejections;
    }
    EXPECT_LE(rejections, 14u);
}

TEST(CiTest, PowerForDirectCoupling) {
    const auto ens = run(fixtures::chain, 20000, 1);
    const auto res = ci_test(ens, {{"Y1", 0.5}}, {{"Y2", 1.0}}, {});
    EXPECT_FALSE(res.independent);
    EXPECT_LT(res.p_value, 1e-6);
}

TEST(CiTest, SharedVariableIsDependent) {
    const auto ens = run(independent_pair, 50, 0);
    const auto res = ci_test(ens, {{"U", 1.0}, {"V", 0.5}}, {{"U", 1.0}}, {});
    EXPECT_FALSE(res.independent);
    EXPECT_EQ(res.p_value, 0.0);
    // Conditioning on the shared variable removes it from both sides.
    EXPECT_TRUE(ci_test(ens, {{"U", 1.0}}, {{"U", 1.0}}, {{"U", 1.0}}).independent);
}

TEST(CiOracle, IndexAndUnknownEvaluation) {
    const auto ens = run(independent_pair, 50, 0);
    const CiOracle oracle(ens, {{"U", 0.5}, {"V", 0.5}});
    EXPECT_EQ(oracle.index({"V", 0.5}), 1u);
    EXPECT_THROW(oracle.index({"V", 1.0}), InvalidArgument);
    EXPECT_THROW(CiOracle(ens, {{"U", 0.52}}), InvalidArgument);
}

TEST(LocalIndependence, ChainCertificatesHoldAndCouplingIsDetected) {
    const auto ens = run(fixtures::chain, 2000, 5, 0.01);
    EXPECT_TRUE(local_independence_test(ens, {"Y1"}, {"Y3"}, {"Y2"}).holds);
    EXPECT_TRUE(local_independence_test(ens, {"Y3"}, {"Y1"}, {}).holds);
    const auto direct = local_independence_test(ens, {"Y1"}, {"Y2"}, {});
    EXPECT_FALSE(direct.holds);
    EXPECT_GT(direct.score, 10.0);
}

TEST(LocalIndependence, DegenerateQueries) {
    const auto ens = run(fixtures::chain, 200, 5, 0.01);
    EXPECT_FALSE(local_independence_test(ens, {"Y1"}, {"Y1"}, {}).holds);
    EXPECT_TRUE(local_independence_test(ens, {"Y1"}, {"Y3"}, {"Y1"}).holds);  // A inside C is vacuous
    EXPECT_THROW(local_independence_test(ens, {"Y1"}, {}, {}), InvalidArgument);
    EXPECT_THROW(local_independence_test(ens, {"Y1"}, {"Y2"}, {}, 0), InvalidArgument);

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.n_paths = 50;
    cfg.record_stride = 10;
    const auto coarse = simulate(parse_model(fixtures::chain), cfg);
    EXPECT_THROW(local_independence_test(coarse, {"Y1"}, {"Y2"}, {}), InvalidArgument);
}

TEST(LocalIndependence, TestIndicesSpreadOverGrid) {
    const auto ens = run(fixtures::chain, 10, 0, 0.01);
    const auto idx = default_test_indices(ens, 2);
    ASSERT_EQ(idx.size(), 5u);
    EXPECT_GE(idx.front(), 1u);
    EXPECT_LT(idx.back() + 1, ens.grid.size());
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
}
