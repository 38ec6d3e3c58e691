#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>

#include "shapekern/socp/program.hpp"

namespace shapekern::socp {

/// Ruiz equilibration  A_hat = E A D,  b_hat = E b,  c_hat = gamma D c.
/// Rows of one second-order cone share a single factor so the cone is preserved.
struct Equilibration {
    Eigen::VectorXd D;  // column factors
    Eigen::VectorXd E;  // row factors
    double gamma = 1.0;
    ConicProgram scaled;

    [[nodiscard]] Eigen::VectorXd unscale_x(const Eigen::VectorXd &xh) const { return D.cwiseProduct(xh); }
    [[nodiscard]] Eigen::VectorXd unscale_s(const Eigen::VectorXd &sh) const { return sh.cwiseQuotient(E); }
    [[nodiscard]] Eigen::VectorXd unscale_y(const Eigen::VectorXd &yh) const { return E.cwiseProduct(yh) / gamma; }
    [[nodiscard]] Eigen::VectorXd scale_x(const Eigen::VectorXd &x) const { return x.cwiseQuotient(D); }
    [[nodiscard]] Eigen::VectorXd scale_y(const Eigen::VectorXd &y) const { return gamma * y.cwiseQuotient(E); }
};

namespace detail {

inline double clamp_norm(double v) { return std::clamp(v, 1e-4, 1e4); }

}  // namespace detail

inline Equilibration equilibrate(const ConicProgram &p, int sweeps = 10) {
    const int n = p.num_vars();
    const int m = p.num_rows();
    Equilibration eq;
    eq.D = Eigen::VectorXd::Ones(n);
    eq.E = Eigen::VectorXd::Ones(m);
    SparseMatrix A = p.A;

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd row = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < A.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
                const double a = std::abs(it.value());
                col[j] = std::max(col[j], a);
                row[it.row()] = std::max(row[it.row()], a);
            }
        }
        int r = 0;
        for (const auto &k : p.cones) {
            if (k.kind == ConeKind::SOC) {
                const double mx = row.segment(r, k.dim).maxCoeff();
                row.segment(r, k.dim).setConstant(mx);
            }
            r += k.dim;
        }
        Eigen::VectorXd dc(n);
        Eigen::VectorXd er(m);
        for (int j = 0; j < n; ++j) dc[j] = col[j] > 0.0 ? 1.0 / std::sqrt(detail::clamp_norm(col[j])) : 1.0;
        for (int i = 0; i < m; ++i) er[i] = row[i] > 0.0 ? 1.0 / std::sqrt(detail::clamp_norm(row[i])) : 1.0;
        A = er.asDiagonal() * A * dc.asDiagonal();
        eq.D = eq.D.cwiseProduct(dc);
        eq.E = eq.E.cwiseProduct(er);
    }

    eq.scaled.A = A;
    eq.scaled.b = eq.E.cwiseProduct(p.b);
    const Eigen::VectorXd dcost = eq.D.cwiseProduct(p.c);
    const double cn = dcost.size() ? dcost.lpNorm<Eigen::Infinity>() : 0.0;
    eq.gamma = cn > 0.0 ? 1.0 / detail::clamp_norm(cn) : 1.0;
    eq.scaled.c = eq.gamma * dcost;
    eq.scaled.cones = p.cones;
    return eq;
}

}  // namespace shapekern::socp
