#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "shapekern/datasets.hpp"
#include "shapekern/estimator.hpp"

using namespace shapekern;

namespace {

Dataset tiny(std::vector<double> xs, std::vector<double> ys) {
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(xs.size()), 1);
    d.y.resize(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t n = 0; n < xs.size(); ++n) {
        d.X(static_cast<Eigen::Index>(n), 0) = xs[n];
        d.y[static_cast<Eigen::Index>(n)] = ys[n];
    }
    return d;
}

ConstraintSystem unconstrained() {
    ConstraintSystem s;
    s.bias = BiasSet::zero();
    return s;
}

ConstraintSystem increasing_on(double lo, double hi) {
    ConstraintSystem s;
    s.constraints.push_back(monotone_increasing(0, CompactBox::interval(lo, hi)));
    s.bias = BiasSet::zero();
    return s;
}

PointSet line(double lo, double hi, int n) {
    PointSet x(n, 1);
    for (int k = 0; k < n; ++k) x(k, 0) = lo + (hi - lo) * k / (n - 1);
    return x;
}

int count_role(const AssembledProgram &p, ConeRole role) {
    return static_cast<int>(std::count(p.layout.roles.begin(), p.layout.roles.end(), role));
}

const socp::Cone &first_cone(const AssembledProgram &p, ConeRole role) {
    for (std::size_t k = 0; k < p.layout.roles.size(); ++k) {
        if (p.layout.roles[k] == role) return p.conic.cones[k];
    }
    throw std::logic_error("no such cone");
}

}  // namespace

TEST(Fit, RidgeMatchesClosedForm) {
    // (K + lambda N I) a = y for the representer coefficients.
    const auto data = tiny({-0.4, 0.3, 1.1}, {1.0, -0.5, 0.25});
    const auto spec = KernelSpec::gaussian(0.7);
    const double lam = 0.05;
    const auto m = fit(data, ObjectiveSpec::ridge(lam), unconstrained(), Covering{}, spec, Mode::Discretized);

    const int N = 3;
    Eigen::MatrixXd K(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) K(i, j) = std::exp(-std::pow(data.X(i, 0) - data.X(j, 0), 2) / (2 * 0.49));
    const Eigen::VectorXd a = (K + lam * N * Eigen::MatrixXd::Identity(N, N)).ldlt().solve(data.y);
    const auto pts = line(-1, 2, 7);
    const Eigen::VectorXd got = predict(m, DifferentialOperator::identity(1), pts).col(0);
    for (int k = 0; k < pts.rows(); ++k) {
        double want = 0;
        for (int n = 0; n < N; ++n) want += a[n] * std::exp(-std::pow(pts(k, 0) - data.X(n, 0), 2) / (2 * 0.49));
        EXPECT_NEAR(got[k], want, 1e-6);
    }
    const Eigen::VectorXd res = data.y - K * a;
    const double value = res.squaredNorm() / N + lam * a.dot(K * a);
    EXPECT_NEAR(m.value, value, 1e-7);
    EXPECT_NEAR(m.norms[0], std::sqrt(a.dot(K * a)), 1e-6);
}

TEST(Fit, TwoSampleRidgeClosedForm) {
    const auto data = tiny({0.0, 1.0}, {1.0, 2.0});
    const auto spec = KernelSpec::gaussian(1.0);
    const double lam = 0.1, k01 = std::exp(-0.5);
    const auto m = fit(data, ObjectiveSpec::ridge(lam), unconstrained(), Covering{}, spec, Mode::Discretized);
    Eigen::Matrix2d K;
    K << 1, k01, k01, 1;
    const Eigen::Vector2d a = (K + 2 * lam * Eigen::Matrix2d::Identity()).inverse() * data.y;
    const auto f = predict(m, DifferentialOperator::identity(1), data.X);
    EXPECT_NEAR(f(0, 0), (K * a)[0], 1e-6);
    EXPECT_NEAR(f(1, 0), (K * a)[1], 1e-6);
}

TEST(Fit, ParametrizationsAgree) {
    const auto data = quadratic_dataset(20, 1.0, 3);
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto cov = anchored_grid_covering(sys, spec, 10, Norm::L2);
    FitOptions rep;
    rep.parametrization = Parametrization::Representer;
    rep.solver.tol = 1e-7;
    const auto obj = ObjectiveSpec::ridge(1e-3);
    const auto a = fit(data, obj, sys, cov, spec, Mode::Discretized);
    const auto b = fit(data, obj, sys, cov, spec, Mode::Discretized, rep);
    EXPECT_NEAR(a.value, b.value, 1e-6 * std::max(1.0, a.value));
    EXPECT_LE(rkhs_distance(a, 0, b, 0), 1e-3);
}

TEST(Fit, SolutionLiesInGeneratorSpan) {
    // Predicting through the coefficients must reproduce the loss the solver saw.
    const auto data = quadratic_dataset(15, 1.0, 4);
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto cov = anchored_grid_covering(sys, spec, 10, Norm::L2);
    const auto m = fit(data, ObjectiveSpec::ridge(1e-3), sys, cov, spec, Mode::Tightened);
    const Eigen::VectorXd f = predict(m, DifferentialOperator::identity(1), data.X).col(0);
    const double loss = (data.y - f).squaredNorm() / data.size();
    EXPECT_NEAR(loss, m.loss, 1e-9);
    EXPECT_NEAR(m.value, loss + 1e-3 * m.norms[0] * m.norms[0], 1e-6);
}

TEST(Fit, InactiveConstraintLeavesFitUnchanged) {
    // Data already increasing; the monotone fit equals the unconstrained one.
    const auto data = tiny({0.0, 0.5, 1.0, 1.5, 2.0}, {0.0, 0.5, 1.0, 1.5, 2.0});
    const auto spec = KernelSpec::gaussian(1.0);
    const auto sys = increasing_on(0, 2);
    const auto obj = ObjectiveSpec::ridge(1e-4);
    const auto free_fit = fit(data, obj, unconstrained(), Covering{}, spec, Mode::Discretized);
    const auto cov = anchored_grid_covering(sys, spec, 20, Norm::L2);
    const auto tight = fit(data, obj, sys, cov, spec, Mode::Tightened);
    EXPECT_NEAR(tight.value, free_fit.value, 1e-4);
}

TEST(Fit, SandwichOnOneInstance) {
    const auto data = quadratic_dataset(30, 1.0, 11);
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto obj = ObjectiveSpec::ridge(1e-4);
    const auto cov = anchored_grid_covering(sys, spec, 20, Norm::L2);
    const auto e = fit(data, obj, sys, cov, spec, Mode::Tightened);
    const auto d = fit(data, obj, sys, cov, spec, Mode::Discretized);
    const auto u = fit(data, obj, unconstrained(), Covering{}, spec, Mode::Discretized);
    EXPECT_LE(u.value, d.value + 1e-7);
    EXPECT_LE(d.value, e.value + 1e-7);
}

TEST(Assemble, ZeroBuffersMatchDiscretized) {
    const auto data = quadratic_dataset(10, 1.0, 5);
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    auto cov = anchored_grid_covering(sys, spec, 5, Norm::L2);
    for (auto &e : cov.eta) e.setZero();
    const auto obj = ObjectiveSpec::ridge(1e-3);
    const auto t = assemble(data, obj, sys, cov, spec, Mode::Tightened);
    const auto d = assemble(data, obj, sys, cov, spec, Mode::Discretized);
    EXPECT_EQ(t.conic.cones, d.conic.cones);
    EXPECT_EQ(t.conic.b, d.conic.b);
    EXPECT_EQ(Eigen::MatrixXd(t.conic.A), Eigen::MatrixXd(d.conic.A));
    EXPECT_EQ(count_role(t, ConeRole::Tightening), 0);
}

TEST(Assemble, QuantileProgramStructure) {
    const int N = 12;
    const auto data = heteroscedastic_dataset(N, 2);
    const auto spec = KernelSpec::gaussian(0.3);
    const auto sys = non_crossing_system(2, CompactBox::interval(0, 1));
    const auto cov = anchored_grid_covering(sys, spec, 3, Norm::L2);
    const int M = cov.total_centers();
    ASSERT_EQ(M, 3);
    FitOptions rep;
    rep.parametrization = Parametrization::Representer;
    const auto p = assemble(data, ObjectiveSpec::pinball({0.25, 0.75}, Regularization::NormBall, 2.0, 5.0), sys, cov,
                            spec, Mode::Tightened, rep);
    EXPECT_EQ(first_cone(p, ConeRole::Loss), socp::Cone::nonneg(4 * N));
    EXPECT_EQ(first_cone(p, ConeRole::Constraint), socp::Cone::nonneg(M));
    ASSERT_EQ(count_role(p, ConeRole::Tightening), 1);
    // Zero anchors contribute no generators.
    EXPECT_EQ(first_cone(p, ConeRole::Tightening), socp::Cone::soc(1 + N + M));
    EXPECT_EQ(count_role(p, ConeRole::Regularization), 2);
    EXPECT_EQ(count_role(p, ConeRole::BiasBox), 0);
}

TEST(Assemble, AnchorAddsAGenerator) {
    const int N = 6;
    const auto data = quadratic_dataset(N, 1.0, 6);
    const auto spec = KernelSpec::gaussian(0.5);
    auto sys = increasing_on(0, 2);
    sys.constraints[0].f0.weights = Eigen::VectorXd::Constant(1, 0.5);
    sys.constraints[0].f0.centers = PointSet::Constant(1, 1, 1.0);
    const auto cov = anchored_grid_covering(sys, spec, 5, Norm::L2);
    FitOptions rep;
    rep.parametrization = Parametrization::Representer;
    const auto p = assemble(data, ObjectiveSpec::ridge(1e-3), sys, cov, spec, Mode::Tightened, rep);
    EXPECT_EQ(first_cone(p, ConeRole::Tightening), socp::Cone::soc(1 + 1 + N + cov.total_centers()));
    EXPECT_EQ(p.anchors.size(), 1u);
    EXPECT_EQ(p.anchor_of, std::vector<int>{0});
}

TEST(Fit, PinballConstantTarget) {
    const auto data = tiny({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, {3, 3, 3, 3, 3, 3});
    ConstraintSystem sys;
    sys.Q = sys.P = 1;
    const auto m = fit(data, ObjectiveSpec::pinball({0.5}, Regularization::Ridge, 1e-2, 0.0), sys, Covering{},
                       KernelSpec::gaussian(0.5), Mode::Discretized);
    EXPECT_NEAR(m.bias[0], 3.0, 1e-5);
    EXPECT_LE(m.norms[0], 1e-4);
    EXPECT_NEAR(m.value, 0.0, 1e-6);
}

TEST(Fit, PinballWithFlatFunctionRecoversEmpiricalQuantile) {
    // A tiny norm ball pins f near 0, so b_q is an empirical tau_q-quantile.
    const auto data = heteroscedastic_dataset(41, 13);
    const std::vector<double> tau{0.25, 0.5, 0.9};
    ConstraintSystem sys;
    sys.Q = sys.P = 3;
    const auto m = fit(data, ObjectiveSpec::pinball(tau, Regularization::NormBall, 1e-8, 100.0), sys, Covering{},
                       KernelSpec::gaussian(0.3), Mode::Discretized);
    std::vector<double> ys(data.y.data(), data.y.data() + data.size());
    std::sort(ys.begin(), ys.end());
    for (int q = 0; q < 3; ++q) {
        // Any minimiser lies between the order statistics around N tau.
        const auto k = static_cast<std::size_t>(std::ceil(tau[q] * ys.size())) - 1;
        EXPECT_GE(m.bias[q], ys[k > 0 ? k - 1 : 0] - 1e-6) << "level " << q;
        EXPECT_LE(m.bias[q], ys[std::min(k + 1, ys.size() - 1)] + 1e-6) << "level " << q;
    }
}

TEST(Fit, PinballLevelsOrderTheFits) {
    // Tiny lambda: each level nearly interpolates its empirical quantile.
    const auto data = heteroscedastic_dataset(200, 9);
    const std::vector<double> tau{0.2, 0.8};
    const auto spec = KernelSpec::gaussian(0.3);
    ConstraintSystem sys;
    sys.Q = sys.P = 2;
    const auto m = fit(data, ObjectiveSpec::pinball(tau, Regularization::NormBall, 3.0, 50.0), sys,
                       Covering{}, spec, Mode::Discretized);
    const auto f = predict(m, DifferentialOperator::identity(1), data.X);
    for (int q = 0; q < 2; ++q) {
        const double below = (data.y.array() <= f.col(q).array()).cast<double>().mean();
        EXPECT_NEAR(below, tau[q], 0.1) << "level " << q;
    }
}

TEST(Fit, NormBallRespectsRadii) {
    const auto data = quadratic_dataset(25, 1.0, 12);
    ConstraintSystem sys;
    auto obj = ObjectiveSpec::ridge(1.0);
    obj.regularization = Regularization::NormBall;
    obj.lambda_f = 0.5;
    obj.lambda_b = 0.1;
    obj.intercept = true;
    const auto m = fit(data, obj, sys, Covering{}, KernelSpec::gaussian(0.5), Mode::Discretized);
    EXPECT_LE(m.norms[0], 0.5 + 1e-6);
    EXPECT_LE(std::abs(m.bias[0]), 0.1 + 1e-6);
    EXPECT_NEAR(m.value, m.loss, 0.0);
}

TEST(Fit, BiasBoxIsHonoured) {
    const auto data = tiny({0.0, 0.5, 1.0}, {5.0, 5.0, 5.0});
    ConstraintSystem sys;
    sys.bias = BiasSet::box(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    auto obj = ObjectiveSpec::ridge(1e-2);
    obj.intercept = true;
    const auto m = fit(data, obj, sys, Covering{}, KernelSpec::gaussian(1.0), Mode::Discretized);
    EXPECT_NEAR(m.bias[0], 1.0, 1e-6);
}

TEST(Fit, InfeasibleSystemRaisesSolverFailure) {
    // f' >= 1 and f' <= -1 on the same interval.
    const auto data = quadratic_dataset(8, 1.0, 1);
    const auto spec = KernelSpec::gaussian(0.5);
    auto sys = increasing_on(0, 1);
    sys.constraints[0].b0 = 1.0;
    auto down = monotone_decreasing(0, CompactBox::interval(0, 1));
    down.b0 = 1.0;
    sys.constraints.push_back(down);
    const auto cov = anchored_grid_covering(sys, spec, 5, Norm::L2);
    EXPECT_THROW(fit(data, ObjectiveSpec::ridge(1e-3), sys, cov, spec, Mode::Discretized), SolverFailure);
}

TEST(Fit, InputValidation) {
    const auto data = quadratic_dataset(5, 1.0, 1);
    const auto spec = KernelSpec::gaussian(0.5);
    const auto sys = increasing_on(0, 2);
    const auto cov = anchored_grid_covering(sys, spec, 5, Norm::L2);
    EXPECT_THROW(fit(data, ObjectiveSpec::ridge(0.0), sys, cov, spec, Mode::Tightened), std::invalid_argument);
    EXPECT_THROW(fit(data, ObjectiveSpec::ridge(1e-3), sys, Covering{}, spec, Mode::Tightened), std::invalid_argument);
    auto bad = data;
    bad.y[2] = std::nan("");
    EXPECT_THROW(fit(bad, ObjectiveSpec::ridge(1e-3), sys, cov, spec, Mode::Tightened), std::invalid_argument);
    EXPECT_THROW(fit(data, ObjectiveSpec::pinball({0.6, 0.4}, Regularization::Ridge, 1e-3, 0.0), sys, cov, spec,
                     Mode::Tightened),
                 std::invalid_argument);
    auto convex = sys;
    convex.constraints[0] = convex_along(0, CompactBox::interval(0, 2));
    const auto cov2 = anchored_grid_covering(convex, spec, 5, Norm::L2);
    EXPECT_THROW(fit(data, ObjectiveSpec::ridge(1e-3), convex, cov2, KernelSpec::gaussian(0.5, 1), Mode::Tightened),
                 OrderError);
}

TEST(Predict, SingleSectionAndDerivative) {
    // One sample at 0 with y = 1 and tiny lambda: f = a k(0, .) with f(0) ~ 1.
    const auto data = tiny({0.0}, {1.0});
    const auto m = fit(data, ObjectiveSpec::ridge(1e-8), unconstrained(), Covering{}, KernelSpec::gaussian(1.0),
                       Mode::Discretized);
    PointSet at0 = PointSet::Zero(1, 1);
    EXPECT_NEAR(predict(m, DifferentialOperator::identity(1), at0)(0, 0), 1.0, 1e-6);
    EXPECT_NEAR(predict(m, DifferentialOperator::partial({1}), at0)(0, 0), 0.0, 1e-12);
    PointSet at1 = PointSet::Constant(1, 1, 1.0);
    EXPECT_NEAR(predict(m, DifferentialOperator::partial({1}), at1)(0, 0), -std::exp(-0.5), 1e-6);
}

TEST(Predict, WrongDimensionThrows) {
    const auto data = tiny({0.0}, {1.0});
    const auto m = fit(data, ObjectiveSpec::ridge(1e-3), unconstrained(), Covering{}, KernelSpec::gaussian(1.0),
                       Mode::Discretized);
    EXPECT_THROW(predict(m, DifferentialOperator::identity(1), PointSet::Zero(2, 2)), std::invalid_argument);
}

TEST(RkhsDistance, SelfAndKnownPair) {
    const auto spec = KernelSpec::gaussian(1.0);
    const auto a = fit(tiny({0.0}, {1.0}), ObjectiveSpec::ridge(1e-8), unconstrained(), Covering{}, spec,
                       Mode::Discretized);
    const auto b = fit(tiny({1.0}, {1.0}), ObjectiveSpec::ridge(1e-8), unconstrained(), Covering{}, spec,
                       Mode::Discretized);
    EXPECT_NEAR(rkhs_distance(a, 0, a, 0), 0.0, 1e-12);
    // |k(0,.) - k(1,.)|^2 = 2 - 2 e^{-1/2}, coefficients ~ 1.
    EXPECT_NEAR(rkhs_distance(a, 0, b, 0), std::sqrt(2 - 2 * std::exp(-0.5)), 1e-6);
    EXPECT_THROW(rkhs_distance(a, 1, b, 0), std::out_of_range);
}

TEST(Bounds, Arithmetic) {
    EXPECT_DOUBLE_EQ(ridge_strong_convexity(ObjectiveSpec::ridge(0.25)), 0.5);
    EXPECT_DOUBLE_EQ(aposteriori_bound(1.5, 1.0, 0.25), 2.0);
    EXPECT_DOUBLE_EQ(aposteriori_bound(1.0, 1.0 + 1e-12, 1.0), 0.0);
    EXPECT_THROW(aposteriori_bound(1.0, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(aposteriori_bound(1.0, 0.5, 0.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ(apriori_bound(0.5, 2.0, 4.0, 2.0), 2.0);
    EXPECT_THROW(apriori_bound(-0.1, 1, 1, 1), std::invalid_argument);
    auto nb = ObjectiveSpec::ridge(1.0);
    nb.regularization = Regularization::NormBall;
    EXPECT_THROW(ridge_strong_convexity(nb), std::invalid_argument);
}

TEST(Bounds, AprioriConstant) {
    Eigen::MatrixXd U(1, 2);
    U << -1, 1;
    EXPECT_NEAR(apriori_constant(U, Eigen::Vector<double, 1>(3.0)), 3.0 / std::sqrt(2.0), 1e-12);
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_NEAR(apriori_constant(I2, Eigen::Vector2d(1.0, 2.0)), std::sqrt(2.0) * 2.0, 1e-12);
    Eigen::MatrixXd rank1(2, 2);
    rank1 << 1, 1, 2, 2;
    EXPECT_THROW(apriori_constant(rank1, Eigen::Vector2d(1, 1)), std::invalid_argument);
}

TEST(Covering, DerivativeBufferAtZeroSeparation) {
    // d/dx d/dy k(x, y) at x = y equals 1 / sigma^2 for the Gaussian.
    const auto spec = KernelSpec::gaussian(0.5);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3);
    EXPECT_NEAR(eval_derivative_kernel(spec, DifferentialOperator::partial({1}), DifferentialOperator::partial({1}), x, x),
                4.0, 1e-12);
    const double delta = 0.1;
    const double eta = compute_eta(spec, DifferentialOperator::partial({1}), x, delta, Norm::L2);
    const double s2 = 0.25;
    EXPECT_NEAR(eta, std::sqrt(2 / s2 - 2 * (1 / s2 - delta * delta / (s2 * s2)) * std::exp(-delta * delta / (2 * s2))),
                1e-6);
}
