#include <gtest/gtest.h>

#include <cmath>

#include "shapekern/datasets.hpp"
#include "shapekern/verify.hpp"

using namespace shapekern;

namespace {

ConstraintSystem increasing_on(double lo, double hi) {
    ConstraintSystem s;
    s.constraints.push_back(monotone_increasing(0, CompactBox::interval(lo, hi)));
    s.bias = BiasSet::zero();
    return s;
}

// Hand-built model f = sum_r coef_r k(x_r, .) over sample sections only.
FittedModel sections(const KernelSpec &spec, std::vector<double> xs, std::vector<double> coef) {
    FittedModel m;
    m.kernel = spec;
    m.samples.resize(static_cast<Eigen::Index>(xs.size()), 1);
    m.coef.resize(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t r = 0; r < xs.size(); ++r) {
        m.samples(static_cast<Eigen::Index>(r), 0) = xs[r];
        m.coef(static_cast<Eigen::Index>(r), 0) = coef[r];
    }
    m.layout.N = static_cast<int>(xs.size());
    m.norms = Eigen::VectorXd::Zero(1);
    return m;
}

}  // namespace

TEST(CheckConstraints, LinearFunctionThroughPolynomialKernel) {
    // k(x, y) = x y, so f = -k(1, .) is exactly f(x) = -x.
    const auto spec = KernelSpec::polynomial(1, 0.0, 1);
    const auto down = sections(spec, {1.0}, {-1.0});
    const auto sys = increasing_on(-1, 1);
    const auto rep = check_constraints(down, sys, 101);
    ASSERT_EQ(rep.constraints.size(), 1u);
    EXPECT_NEAR(rep.worst_gap(), -1.0, 1e-12);
    EXPECT_DOUBLE_EQ(rep.constraints[0].proportion_violated, 1.0);
    EXPECT_NEAR(rep.constraints[0].integrated_violation, 2.0, 1e-12);

    const auto up = sections(spec, {1.0}, {1.0});
    EXPECT_NEAR(check_constraints(up, sys, 101).worst_gap(), 1.0, 1e-12);
}

TEST(Monotonicity, LinearExamples) {
    // f = -x on [-1, 1]: proportion (1/2) int 1 = 1, amount int (1 + x) dx = 2.
    const auto spec = KernelSpec::polynomial(1, 0.0, 1);
    const auto down = monotonicity_metrics(sections(spec, {1.0}, {-1.0}), -1, 1, 2001);
    EXPECT_NEAR(down.proportion, 1.0, 1e-3);
    EXPECT_NEAR(down.amount, 2.0, 1e-3);
    const auto up = monotonicity_metrics(sections(spec, {1.0}, {1.0}), -1, 1, 2001);
    EXPECT_EQ(up.proportion, 0.0);
    EXPECT_EQ(up.amount, 0.0);
}

TEST(Monotonicity, GaussianBumpAgainstAnalyticIntegrals) {
    // f = k(0, .) with sigma 1 on [-1, 1]: rises to 1 at 0, then falls.
    const auto spec = KernelSpec::gaussian(1.0);
    const auto bump = sections(spec, {0.0}, {1.0});
    const auto mm = monotonicity_metrics(bump, -1, 1, 20001);
    // int_0^1 -f' = 1 - e^{-1/2}; divided by the length 2.
    EXPECT_NEAR(mm.proportion, (1 - std::exp(-0.5)) / 2, 1e-6);
    // int_0^1 (1 - e^{-x^2/2}) dx = 1 - sqrt(pi/2) erf(1/sqrt 2).
    EXPECT_NEAR(mm.amount, 1 - std::sqrt(M_PI / 2) * std::erf(1 / std::sqrt(2.0)), 1e-6);
}

TEST(Monotonicity, RejectsBadInput) {
    const auto spec = KernelSpec::gaussian(1.0);
    const auto bump = sections(spec, {0.0}, {1.0});
    EXPECT_THROW(monotonicity_metrics(bump, 1, 0, 100), std::invalid_argument);
    EXPECT_THROW(monotonicity_metrics(bump, 0, 1, 5), std::invalid_argument);
}

TEST(CheckConstraints, MarginsMatchDerivativeOracle) {
    // f = A (k(-c, .) - k(c, .)) has f'(x) = A/s^2 ((x - c) e^{-(x-c)^2/2s^2} - (x + c) e^{-(x+c)^2/2s^2}).
    const double s = 10.0, c = 10.0, A = s * s * std::exp(0.5) / (2 * c);
    const auto spec = KernelSpec::gaussian(s);
    const auto m = sections(spec, {-c, c}, {A, -A});
    const auto sys = increasing_on(-1, 1);
    PointSet pts(5, 1);
    pts << -1, -0.5, 0, 0.5, 1;
    const Eigen::VectorXd got = constraint_margins(m, sys, 0, pts);
    for (int k = 0; k < 5; ++k) {
        const double x = pts(k, 0);
        const double want = A / (s * s) *
                            ((x - c) * std::exp(-(x - c) * (x - c) / (2 * s * s)) -
                             (x + c) * std::exp(-(x + c) * (x + c) / (2 * s * s)));
        EXPECT_NEAR(got[k], want, 1e-12);
    }
    // Scaled so that f'(0) = -1: close to f = -x near the origin.
    EXPECT_NEAR(got[2], -1.0, 1e-12);
}

TEST(CheckConstraints, EmptySystemGivesEmptyReport) {
    const auto m = sections(KernelSpec::gaussian(1.0), {0.0}, {1.0});
    ConstraintSystem none;
    const auto rep = check_constraints(m, none, 10);
    EXPECT_TRUE(rep.constraints.empty());
    EXPECT_EQ(rep.worst_gap(), std::numeric_limits<double>::infinity());
    EXPECT_THROW(check_constraints(m, none, 1), std::invalid_argument);
}

TEST(CheckConstraints, TightenedFitsAreFeasible) {
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    for (int seed = 0; seed < 4; ++seed) {
        const auto data = quadratic_dataset(30, 1.0, 40 + seed);
        const auto cov = uniform_covering(sys, spec, 0.1, Norm::L2);
        const auto m = fit(data, ObjectiveSpec::ridge(1e-4), sys, cov, spec, Mode::Tightened);
        EXPECT_GE(check_constraints(m, sys, 10000).worst_gap(), -1e-6) << "seed " << seed;
        const auto mm = monotonicity_metrics(m, 0, 2, 2001);
        EXPECT_LE(mm.proportion, 1e-6);
        EXPECT_LE(mm.amount, 1e-6);
    }
}

TEST(CheckConstraints, WorstGapDecreasesUnderNestedGridRefinement) {
    // n -> 2n - 1 keeps every old grid point, so the minimum can only drop.
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto data = quadratic_dataset(30, 2.0, 8);
    const auto m = fit(data, ObjectiveSpec::ridge(1e-4), ConstraintSystem{{}, 1, 1, BiasSet::zero()}, Covering{}, spec,
                       Mode::Discretized);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 3; n < 2000; n = 2 * n - 1) {
        const double g = check_constraints(m, sys, n).worst_gap();
        EXPECT_LE(g, prev) << n;
        prev = g;
    }
}

TEST(Reference, StableUnderRefinementAndDeterministic) {
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto data = quadratic_dataset(30, 1.0, 21);
    const auto obj = ObjectiveSpec::ridge(1e-4);
    const auto r400 = brute_force_reference(data, obj, sys, spec, 400);
    const auto r200 = brute_force_reference(data, obj, sys, spec, 200);
    EXPECT_LE(r200.value, r400.value + 1e-9);
    EXPECT_NEAR(r200.value, r400.value, 1e-3);
    const auto again = brute_force_reference(data, obj, sys, spec, 200);
    EXPECT_EQ(again.coef, r200.coef);
    EXPECT_EQ(r400.covering.nets[0].size(), 400);
    EXPECT_EQ(r400.mode, Mode::Discretized);
}

TEST(Reference, WithoutConstraintsEqualsRidge) {
    const auto spec = KernelSpec::gaussian(0.5);
    const auto data = quadratic_dataset(10, 1.0, 2);
    ConstraintSystem none{{}, 1, 1, BiasSet::zero()};
    const auto obj = ObjectiveSpec::ridge(1e-2);
    const auto ref = brute_force_reference(data, obj, none, spec, 50);
    const auto m = fit(data, obj, none, Covering{}, spec, Mode::Discretized);
    EXPECT_NEAR(rkhs_distance(ref, 0, m, 0), 0.0, 1e-6);
}

TEST(Bounds, AposterioriBoundHolds) {
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto obj = ObjectiveSpec::ridge(1e-4);
    for (int seed = 0; seed < 3; ++seed) {
        const auto data = quadratic_dataset(30, 1.0, 70 + seed);
        const auto cov = anchored_grid_covering(sys, spec, 20, Norm::L2);
        const auto e = fit(data, obj, sys, cov, spec, Mode::Tightened);
        const auto d = fit(data, obj, sys, cov, spec, Mode::Discretized);
        const auto ref = brute_force_reference(data, obj, sys, spec, 400);
        const double bound = aposteriori_bound(e.value, d.value, ridge_strong_convexity(obj));
        EXPECT_LE(rkhs_distance(e, 0, ref, 0), bound + 1e-6) << "seed " << seed;
    }
}
