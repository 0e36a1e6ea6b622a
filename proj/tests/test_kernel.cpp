#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bergman/kernel.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

constexpr double pi = std::numbers::pi;

QuadratureMeasure two_nodes() {
    return build_discrete_measure(std::vector<cplx>{{0.0, 0.0}, {1.0, 0.0}}, std::vector<double>{1.0, 1.0});
}

FunctionSpan constant_span(Index m) { return FunctionSpan::tabulated(CMatrix::Ones(m, 1)); }

RVector vec(std::initializer_list<double> v) {
    RVector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (const double x : v) out(i++) = x;
    return out;
}

SpanFrame frame_of(const oracle::DiscreteInstance& in) {
    return SpanFrame(FunctionSpan::tabulated(in.values), build_discrete_measure(in.points, in.masses));
}

} // namespace

TEST(Gram, SingleNodeMassTwo) {
    const auto mu = build_discrete_measure(std::vector<cplx>{{0.3, 0.1}}, std::vector<double>{2.0});
    const CMatrix g = assemble_gram(constant_span(1), mu, WeightFunction(RVector::Zero(1)));
    ASSERT_EQ(g.rows(), 1);
    EXPECT_NEAR(std::abs(g(0, 0) - 2.0), 0.0, 1e-15);
}

TEST(Gram, TwoNodesConstantSpan) {
    const CMatrix g = assemble_gram(constant_span(2), two_nodes(), WeightFunction(RVector::Zero(2)));
    EXPECT_NEAR(std::abs(g(0, 0) - 2.0), 0.0, 1e-15);
}

TEST(Gram, UnitDiskMonomialsAreDiagonal) {
    const auto mu = build_disk_measure(1.0, 4, 8);
    const CMatrix g = assemble_gram(FunctionSpan::monomials(2), mu, eval_weight(family::Constant{0.0}, mu));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const cplx want = a == b ? cplx(pi / (a + 1)) : cplx(0.0);
            EXPECT_NEAR(std::abs(g(a, b) - want), 0.0, 1e-13) << a << "," << b;
        }
}

TEST(Gram, IsHermitian) {
    std::mt19937_64 rng(3);
    const auto in = oracle::random_instance(rng, 30, 6);
    const CMatrix g = assemble_gram(FunctionSpan::tabulated(in.values), build_discrete_measure(in.points, in.masses),
                                    WeightFunction(in.phi));
    EXPECT_EQ((g - g.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gram, SizeMismatchThrows) {
    EXPECT_THROW(assemble_gram(constant_span(3), two_nodes(), WeightFunction(RVector::Zero(2))), dimension_mismatch);
    EXPECT_THROW(assemble_gram(constant_span(2), two_nodes(), WeightFunction(RVector::Zero(3))), dimension_mismatch);
}

TEST(OrthonormalBasis, DiagonalGram) {
    CMatrix g = CMatrix::Zero(2, 2);
    g(0, 0) = pi;
    g(1, 1) = pi / 2;
    const auto ob = orthonormal_basis(g);
    EXPECT_EQ(ob.rank, 2);
    const CMatrix id = ob.coeffs.adjoint() * g * ob.coeffs;
    EXPECT_LE((id - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
    // up to unitary mixing: C C^* = G^{-1}
    const CMatrix cc = ob.coeffs * ob.coeffs.adjoint();
    EXPECT_NEAR(cc(0, 0).real(), 1.0 / pi, 1e-14);
    EXPECT_NEAR(cc(1, 1).real(), 2.0 / pi, 1e-14);
}

TEST(OrthonormalBasis, OneByOne) {
    const auto ob = orthonormal_basis(CMatrix::Constant(1, 1, 2.0));
    EXPECT_EQ(ob.rank, 1);
    EXPECT_NEAR(std::abs(ob.coeffs(0, 0)), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(OrthonormalBasis, ZeroGramHasRankZero) {
    const auto ob = orthonormal_basis(CMatrix::Zero(1, 1));
    EXPECT_EQ(ob.rank, 0);
    EXPECT_EQ(ob.coeffs.cols(), 0);
}

TEST(OrthonormalBasis, DropsNullDirection) {
    // two identical basis vectors
    CMatrix g(2, 2);
    g << 1.0, 1.0, 1.0, 1.0;
    EXPECT_EQ(orthonormal_basis(g).rank, 1);
}

TEST(Kernel, SingleNodeMassTwo) {
    const auto mu = build_discrete_measure(std::vector<cplx>{{0.0, 0.0}}, std::vector<double>{2.0});
    const WeightedSpace sp(SpanFrame(constant_span(1), mu), WeightFunction(RVector::Zero(1)));
    const KernelMatrix k = kernel_matrix(sp);
    EXPECT_NEAR(k.values(0, 0).real(), 0.5, 1e-15);
    EXPECT_LE(reproducing_residual(k, sp.weight(), mu), 1e-15);
}

TEST(Kernel, SingleNodeDensityIsInverseMass) {
    for (const double w : {0.1, 1.0, 7.0})
        for (const double phi : {-2.0, 0.0, 3.0}) {
            const auto mu = build_discrete_measure(std::vector<cplx>{{0.0, 0.0}}, std::vector<double>{w});
            const WeightedSpace sp(SpanFrame(constant_span(1), mu), WeightFunction(vec({phi})));
            const BergmanDensity b = bergman_density(sp);
            EXPECT_NEAR(b.values(0), 1.0 / w, 1e-14 / w);
            EXPECT_NEAR(density_mass(b, mu), 1.0, 1e-14);
        }
}

TEST(Kernel, TwoNodeDensities) {
    const auto mu = two_nodes();
    const SpanFrame frame(constant_span(2), mu);
    const BergmanDensity b0 = bergman_density(WeightedSpace(frame, WeightFunction(vec({0.0, 0.0}))));
    EXPECT_NEAR(b0.values(0), 0.5, 1e-15);
    EXPECT_NEAR(b0.values(1), 0.5, 1e-15);
    const BergmanDensity b1 = bergman_density(WeightedSpace(frame, WeightFunction(vec({-1.0, 1.0}))));
    const double e = std::exp(1.0);
    EXPECT_NEAR(b1.values(0), e / (e + 1.0 / e), 1e-15);
    EXPECT_NEAR(b1.values(1), (1.0 / e) / (e + 1.0 / e), 1e-15);
}

TEST(Kernel, DensityMatchesDenseDiagonal) {
    std::mt19937_64 rng(11);
    const auto in = oracle::random_instance(rng, 25, 7);
    const WeightedSpace sp(frame_of(in), WeightFunction(in.phi));
    const BergmanDensity streamed = bergman_density(sp);
    const BergmanDensity dense = bergman_density(kernel_matrix(sp), sp.weight(), sp.measure());
    EXPECT_LE((streamed.values - dense.values).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Kernel, UnitDiskAtOriginIsOneOverPi) {
    const auto mu = build_disk_measure(1.0, 16, 40);
    for (const int d : {1, 2, 5, 15}) {
        const WeightedSpace sp(SpanFrame(FunctionSpan::monomials(d), mu), eval_weight(family::Constant{0.0}, mu));
        EXPECT_NEAR(kernel_at(sp, 0.0, 0.0).real(), 1.0 / pi, 1e-13) << d;
    }
}

TEST(Kernel, UnitDiskMatchesClosedForm) {
    const auto mu = build_disk_measure(1.0, 64, 128);
    const WeightedSpace sp(SpanFrame(FunctionSpan::monomials(30), mu), eval_weight(family::Constant{0.0}, mu));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> r(0.0, 0.6), th(0.0, 2 * pi);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const cplx z = std::polar(r(rng), th(rng));
        const cplx zeta = std::polar(r(rng), th(rng));
        const cplx ref = oracle::disk_kernel(z, zeta);
        EXPECT_LE(std::abs(ref - oracle::disk_kernel_closed(z, zeta)), 1e-12 * std::abs(ref));
        worst = std::max(worst, std::abs(kernel_at(sp, z, zeta) - ref) / std::abs(ref));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Kernel, TruncationErrorShrinksWithDegree) {
    const auto mu = build_disk_measure(1.0, 64, 128);
    const cplx z(0.5, 0.1), zeta(0.3, -0.4);
    const cplx ref = oracle::disk_kernel_closed(z, zeta);
    double prev = 1e300;
    for (const int d : {5, 10, 20, 30}) {
        const WeightedSpace sp(SpanFrame(FunctionSpan::monomials(d), mu), eval_weight(family::Constant{0.0}, mu));
        const double err = std::abs(kernel_at(sp, z, zeta) - ref);
        EXPECT_LT(err, prev) << d;
        prev = err;
    }
}

TEST(Kernel, RankZeroSpace) {
    const auto mu = two_nodes();
    const WeightedSpace sp(SpanFrame(FunctionSpan::tabulated(CMatrix::Zero(2, 3)), mu), WeightFunction(vec({0.0, 1.0})));
    EXPECT_EQ(sp.rank(), 0);
    const KernelMatrix k = kernel_matrix(sp);
    EXPECT_EQ(k.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(bergman_density(sp).values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(reproducing_residual(k, sp.weight(), mu), 0.0);
    EXPECT_EQ(kernel_min_eigen_relative(k), 0.0);
}

TEST(Kernel, RankDeficientSpan) {
    std::mt19937_64 rng(2);
    auto in = oracle::random_instance(rng, 20, 4);
    CMatrix v(20, 6);
    v << in.values, in.values.col(0) * cplx(2.0, -1.0), in.values.col(1) + in.values.col(2);
    const WeightedSpace sp(SpanFrame(FunctionSpan::tabulated(v), build_discrete_measure(in.points, in.masses)),
                           WeightFunction(in.phi));
    EXPECT_EQ(sp.rank(), 4);
    EXPECT_NEAR(density_mass(bergman_density(sp), sp.measure()), 4.0, 1e-9 * 4);
}

TEST(Kernel, ShiftByFiveLeavesDensityUnchanged) {
    std::mt19937_64 rng(17);
    const auto in = oracle::random_instance(rng, 20, 5);
    const SpanFrame frame = frame_of(in);
    const WeightFunction phi(in.phi);
    const WeightedSpace a(frame, phi);
    const WeightedSpace b(frame, phi.shifted(5.0));
    EXPECT_LE((bergman_density(a).values - bergman_density(b).values).cwiseAbs().maxCoeff(), 1e-12);
    const CMatrix ka = kernel_matrix(a).values, kb = kernel_matrix(b).values;
    EXPECT_LE((std::exp(-5.0) * kb - ka).cwiseAbs().maxCoeff(), 1e-12 * ka.cwiseAbs().maxCoeff());
}

TEST(Kernel, MonotonicityEqualAndShifted) {
    std::mt19937_64 rng(23);
    const auto in = oracle::random_instance(rng, 15, 4);
    const SpanFrame frame = frame_of(in);
    const WeightFunction phi(in.phi);
    const WeightedSpace s1(frame, phi);
    EXPECT_TRUE(kernel_monotonicity_check(s1, s1).holds);
    const WeightedSpace s2(frame, phi.shifted(1.0));
    const auto r = kernel_monotonicity_check(s1, s2);
    EXPECT_TRUE(r.holds);
    EXPECT_LT(r.worst_excess, 0.0);
}

TEST(Kernel, MonotonicityPreconditionNamesNode) {
    const auto mu = two_nodes();
    const SpanFrame frame(constant_span(2), mu);
    const WeightedSpace s1(frame, WeightFunction(vec({0.0, 2.0})));
    const WeightedSpace s2(frame, WeightFunction(vec({0.0, 1.0})));
    try {
        kernel_monotonicity_check(s1, s2);
        FAIL() << "expected precondition_error";
    } catch (const precondition_error& e) {
        ASSERT_TRUE(e.node());
        EXPECT_EQ(*e.node(), 1);
    }
}

// ---------------------------------------------------------------------------
// invariants over random discrete instances

class KernelProperty : public ::testing::TestWithParam<int> {};

TEST_P(KernelProperty, StructuralIdentities) {
    std::mt19937_64 rng(1000 + GetParam());
    std::uniform_int_distribution<Index> mdist(2, 50), ddist(1, 10);
    const Index m = mdist(rng), d = ddist(rng);
    const auto in = oracle::random_instance(rng, m, d);
    const SpanFrame frame = frame_of(in);
    const WeightedSpace sp(frame, WeightFunction(in.phi));
    const Index r = sp.rank();
    EXPECT_EQ(r, std::min(m, d));

    // C^* G C = I
    const CMatrix id = sp.coeffs().adjoint() * sp.gram() * sp.coeffs();
    EXPECT_LE((id - CMatrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);

    // trace identity
    const BergmanDensity b = bergman_density(sp);
    EXPECT_LE(std::abs(density_mass(b, sp.measure()) - double(r)), 1e-9 * std::max<double>(1, r));
    EXPECT_GE(b.values.minCoeff(), 0.0);

    // dense kernel against an explicit projection
    const KernelMatrix k = kernel_matrix(sp);
    const CMatrix kp = oracle::projection_kernel(in.values, frame.measure().masses(), in.phi);
    EXPECT_LE((k.values - kp).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + kp.cwiseAbs().maxCoeff()));

    EXPECT_LE(reproducing_residual(k, sp.weight(), sp.measure()), 1e-9);
    EXPECT_GE(kernel_min_eigen_relative(k), -1e-12);
    EXPECT_EQ((k.values - k.values.adjoint()).cwiseAbs().maxCoeff(), 0.0);

    // extremal characterization
    const RVector ext = oracle::extremal_diagonal(in.values, frame.measure().masses(), in.phi);
    for (Index j = 0; j < m; ++j) EXPECT_NEAR(k.values(j, j).real(), ext(j), 1e-9 * (1.0 + ext(j)));
}

TEST_P(KernelProperty, MonotoneUnderLargerWeight) {
    std::mt19937_64 rng(2000 + GetParam());
    const auto in = oracle::random_instance(rng, 30, 5);
    const SpanFrame frame = frame_of(in);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    RVector phi2 = in.phi;
    for (Index j = 0; j < phi2.size(); ++j) phi2(j) += std::max(0.0, noise(rng));
    const WeightedSpace s1(frame, WeightFunction(in.phi));
    const WeightedSpace s2(frame, WeightFunction(phi2));
    EXPECT_TRUE(kernel_monotonicity_check(s1, s2).holds);
    const RVector e1 = oracle::extremal_diagonal(in.values, frame.measure().masses(), in.phi);
    const RVector e2 = oracle::extremal_diagonal(in.values, frame.measure().masses(), phi2);
    for (Index j = 0; j < e1.size(); ++j) EXPECT_LE(e1(j), e2(j) * (1.0 + 1e-9));
}

INSTANTIATE_TEST_SUITE_P(Random, KernelProperty, ::testing::Range(0, 25));

TEST(Kernel, SteepWeightKeepsFullRank) {
    // high-degree monomials against k|z|^2 span many orders of magnitude
    const auto mu = build_disk_measure(2.0, 64, 242);
    const WeightFunction phi = eval_weight(family::Gauss{40.0}, mu);
    const WeightedSpace sp(SpanFrame(FunctionSpan::monomials(120), mu), phi);
    EXPECT_EQ(sp.rank(), 121);
    EXPECT_LE(sp.orthonormality_defect(), 1e-10);
}
