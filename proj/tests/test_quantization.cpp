#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bergman/quantization.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(MongeAmpere, AnalyticExamples) {
    const auto mu = build_disk_measure(1.0, 6, 12);
    const auto gauss = ma_density(eval_weight(family::Gauss{1.0}, mu), mu);
    EXPECT_EQ(gauss.source, DensitySource::analytic);
    for (Index j = 0; j < mu.size(); ++j) EXPECT_NEAR(gauss.values(j), 1.0 / pi, 1e-15);
    const auto twice = ma_density(eval_weight(family::Gauss{2.0}, mu), mu);
    for (Index j = 0; j < mu.size(); ++j) EXPECT_NEAR(twice.values(j), 2.0 / pi, 1e-15);
    const auto harm = ma_density(eval_weight(family::Harmonic{0.7}, mu), mu);
    EXPECT_EQ(harm.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MongeAmpere, FiniteDifferenceOnPolarGrid) {
    const auto mu = build_disk_measure(1.0, 40, 80);
    const family::RadialPoly f{{0.0, 1.0, 0.5}};  // |z|^2 + |z|^4 / 2
    const WeightFunction tab(eval_weight(f, mu).values());
    ASSERT_FALSE(tab.has_laplacian());
    const auto fd = ma_density(tab, mu);
    EXPECT_EQ(fd.source, DensitySource::finite_difference);
    const auto exact = ma_density(eval_weight(f, mu), mu);
    EXPECT_LE((fd.values - exact.values).cwiseAbs().maxCoeff(), 5e-3);

    const auto discrete = build_discrete_measure(std::vector<cplx>{{0, 0}, {1, 0}}, std::vector<double>{1, 1});
    EXPECT_THROW(ma_density(WeightFunction(RVector::Zero(2)), discrete), unsupported);
    const auto thin = build_disk_measure(1.0, 2, 80);
    EXPECT_THROW(ma_density(WeightFunction(eval_weight(f, thin).values()), thin), unsupported);
    EXPECT_THROW(ma_density(tab, thin), dimension_mismatch);
}

TEST(MongeAmpere, StencilMatchesAnalytic) {
    const auto mu = build_disk_measure(1.0, 5, 9);
    const family::RadialPoly f{{0.3, 1.0, -0.2, 0.1}};
    const auto st = ma_density_stencil(f, mu, 1e-3);
    const auto exact = ma_density(eval_weight(f, mu), mu);
    EXPECT_LE((st.values - exact.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ScaledBergman, OriginAgainstGaussianRadialIntegral) {
    const double R = 2.0, k = 10.0;
    const int degree = 30;
    const auto mu = build_disk_measure(R, 32, 64);
    const SpanFrame frame(FunctionSpan::monomials(degree), mu);
    const WeightedSpace space(frame, eval_weight(family::Gauss{1.0}, mu).scaled(k));
    const double b0 = kernel_at(space, 0.0, 0.0).real();
    EXPECT_NEAR(b0, 1.0 / oracle::gaussian_norm_of_one(k, R), 1e-10 * k);
}

TEST(ScaledBergman, DegreeZeroIsInverseMass) {
    const auto mu = build_disk_measure(1.0, 8, 8);
    const auto b = scaled_bergman(WeightFunction(family::Constant{0.0}), 3.0, 0, mu);
    for (Index j = 0; j < mu.size(); ++j) EXPECT_NEAR(b.values(j), 1.0 / pi, 1e-13);
}

TEST(ScaledBergman, FockInteriorCloseToLimit) {
    const auto mu = build_disk_measure(2.0, 32, 128);
    std::vector<Index> nodes;
    for (Index j = 0; j < mu.size(); ++j)
        if (std::abs(mu.z(j)) <= 1.0) nodes.push_back(j);
    const double k = 10.0;
    const auto b = scaled_bergman(WeightFunction(family::Gauss{1.0}), k, 60, mu, nodes);
    for (Index p = 0; p < b.values.size(); ++p) EXPECT_NEAR(pi * b.values(p) / k, 1.0, 1e-3);
}

TEST(ScaledBergman, Preconditions) {
    const WeightFunction phi(family::Gauss{1.0});
    EXPECT_THROW(scaled_bergman(phi, 1.0, 10, build_disk_measure(1.0, 4, 64)), invalid_configuration);
    EXPECT_THROW(scaled_bergman(phi, 1.0, -1, build_disk_measure(1.0, 4, 4)), invalid_configuration);
    const auto discrete = build_discrete_measure(std::vector<cplx>{{0, 0}}, std::vector<double>{1});
    EXPECT_THROW(scaled_bergman(phi, 1.0, 0, discrete), invalid_configuration);
}

TEST(DegreeRule, ProportionalWithCap) {
    const auto rule = proportional_degree_rule(1.5);
    const auto mu = build_disk_measure(2.0, 128, 482);
    EXPECT_EQ(rule(10.0, mu), 60);
    EXPECT_EQ(rule(20.0, mu), 120);
    EXPECT_EQ(rule(40.0, mu), 240);
    EXPECT_EQ(rule(100.0, mu), 240);  // exactness 481
    EXPECT_EQ(rule(0.1, build_disk_measure(1.0, 4, 8)), 1);
}

TEST(Tcz, GaussianWeightConverges) {
    const auto mu = build_disk_measure(2.0, 32, 128);
    const std::vector<double> ks{5.0, 10.0};
    const auto reps = tcz_convergence_report(WeightFunction(family::Gauss{2.0}), ks, proportional_degree_rule(), mu, 1.0);
    ASSERT_EQ(reps.size(), 2u);
    EXPECT_FALSE(reps[0].eval_points.empty());
    EXPECT_TRUE(reps[0].skipped.empty());
    EXPECT_LE(reps[1].max_abs_dev_from_1, 1e-3);
    EXPECT_LE(reps[1].mean_abs_dev, reps[1].max_abs_dev_from_1);
    EXPECT_TRUE(deviations_nonincreasing(reps, 0.1));
    for (const auto& r : reps)
        for (const Index j : r.eval_points) EXPECT_LE(std::abs(mu.z(j)), 1.0);
}

TEST(Tcz, HarmonicWeightSkipsEveryPoint) {
    const auto mu = build_disk_measure(1.0, 16, 32);
    const std::vector<double> ks{1.0};
    const auto reps = tcz_convergence_report(WeightFunction(family::Harmonic{1.0}), ks, proportional_degree_rule(), mu, 0.5);
    EXPECT_TRUE(reps[0].eval_points.empty());
    EXPECT_FALSE(reps[0].skipped.empty());
    EXPECT_EQ(reps[0].max_abs_dev_from_1, 0.0);
}

TEST(Tcz, NonincreasingHelper) {
    std::vector<ScalingReport> r(3);
    r[0].max_abs_dev_from_1 = 0.1;
    r[1].max_abs_dev_from_1 = 0.105;
    r[2].max_abs_dev_from_1 = 0.05;
    EXPECT_TRUE(deviations_nonincreasing(r, 0.1));
    EXPECT_FALSE(deviations_nonincreasing(r, 0.01));
}

TEST(Tcz, RequiresDiskRule) {
    const auto discrete = build_discrete_measure(std::vector<cplx>{{0, 0}}, std::vector<double>{1});
    const std::vector<double> ks{1.0};
    EXPECT_THROW(tcz_convergence_report(WeightFunction(family::Gauss{1.0}), ks, proportional_degree_rule(), discrete, 0.5),
                 invalid_configuration);
}
