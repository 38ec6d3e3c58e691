#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shapekern/covering.hpp"
#include "shapekern/estimator.hpp"

namespace shapekern {

struct ConstraintViolation {
    int index = 0;
    std::string label;
    double worst_gap = 0.0;  // min over the grid of lhs - rhs
    Eigen::VectorXd worst_point;
    double proportion_violated = 0.0;
    double integrated_violation = 0.0;  // integral of max(0, rhs - lhs) over K_i
};

struct ViolationReport {
    std::vector<ConstraintViolation> constraints;
    int grid_resolution = 0;

    [[nodiscard]] double worst_gap() const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto &c : constraints) w = std::min(w, c.worst_gap);
        return w;
    }
};

/// Margins D_i (W f - f0)_i(x) - (b0 - U b)_i of constraint i at each point.
inline Eigen::VectorXd constraint_margins(const FittedModel &model, const ConstraintSystem &system, int i,
                                          const PointSet &points) {
    const auto &c = system.constraints.at(i);
    if (c.W_row.size() != model.num_functions()) throw std::invalid_argument("constraint does not match the model");
    const Eigen::MatrixXd vals = predict(model, c.op, points, false);
    Eigen::VectorXd margin = vals * c.W_row;
    double rhs = c.b0;
    if (model.bias.size() == c.U_row.size()) rhs -= c.U_row.dot(model.bias);
    margin.array() -= rhs;
    if (!c.f0.is_zero()) {
        for (Eigen::Index n = 0; n < points.rows(); ++n) margin[n] -= c.f0.apply(model.kernel, c.op, points.row(n).transpose());
    }
    return margin;
}

/// Evaluates every constraint on a grid with `grid_points_per_axis` points per
/// axis (endpoints included) over its domain.
inline ViolationReport check_constraints(const FittedModel &model, const ConstraintSystem &system,
                                         int grid_points_per_axis) {
    if (grid_points_per_axis < 2) throw std::invalid_argument("need at least 2 grid points per axis");
    ViolationReport rep;
    rep.grid_resolution = grid_points_per_axis;
    for (int i = 0; i < system.size(); ++i) {
        const auto &c = system.constraints[i];
        const PointSet grid = detail::closed_grid(c.domain, grid_points_per_axis);
        const Eigen::VectorXd m = constraint_margins(model, system, i, grid);
        ConstraintViolation v;
        v.index = i;
        v.label = c.label;
        Eigen::Index arg = 0;
        v.worst_gap = m.minCoeff(&arg);
        v.worst_point = grid.row(arg).transpose();
        v.proportion_violated = static_cast<double>((m.array() < 0.0).count()) / static_cast<double>(m.size());
        v.integrated_violation = c.domain.volume() * (-m.array()).max(0.0).mean();
        rep.constraints.push_back(std::move(v));
    }
    return rep;
}

struct MonotonicityMetrics {
    double proportion = 0.0;  // (1 / (b - a)) int max(0, -f')
    double amount = 0.0;      // int max_{y in [a, x]} (f(y) - f(x)) dx
};

/// Trapezoid quadrature of both violation integrals of function q on [a, b].
inline MonotonicityMetrics monotonicity_metrics(const FittedModel &model, double a, double b, int grid_n, int q = 0) {
    if (model.dim() != 1) throw std::invalid_argument("monotonicity metrics need one-dimensional inputs");
    if (grid_n < 10) throw std::invalid_argument("grid_n must be at least 10");
    if (!(b > a)) throw std::invalid_argument("empty interval");
    PointSet x(grid_n, 1);
    for (int n = 0; n < grid_n; ++n) x(n, 0) = a + (b - a) * n / (grid_n - 1);
    const Eigen::VectorXd f = predict(model, DifferentialOperator::identity(1), x, false).col(q);
    const Eigen::VectorXd df = predict(model, DifferentialOperator::partial({1}), x, false).col(q);
    const double h = (b - a) / (grid_n - 1);
    auto trapezoid = [&](const Eigen::VectorXd &g) { return h * (g.sum() - 0.5 * (g[0] + g[grid_n - 1])); };
    Eigen::VectorXd neg = (-df.array()).max(0.0);
    Eigen::VectorXd drop(grid_n);
    double run = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < grid_n; ++n) {
        run = std::max(run, f[n]);
        drop[n] = run - f[n];
    }
    return {trapezoid(neg) / (b - a), trapezoid(drop)};
}

/// Discretized fit on an anchored grid of about fine_M points per constraint;
/// grids of M points with M dividing fine_M (per axis) are subsets of it.
inline FittedModel brute_force_reference(const Dataset &data, const ObjectiveSpec &objective,
                                         const ConstraintSystem &system, const KernelSpec &spec, int fine_M,
                                         const FitOptions &opts = {}) {
    if (fine_M < 1) throw std::invalid_argument("fine_M must be positive");
    const int d = std::max(1, system.empty() ? data.dim() : system.dim());
    const int per_axis = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(fine_M), 1.0 / d))));
    const auto cov = anchored_grid_covering(system, spec, per_axis, Norm::L2);
    return fit(data, objective, system, cov, spec, Mode::Discretized, opts);
}

}  // namespace shapekern
