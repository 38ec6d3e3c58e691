#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapekern/socp/cones.hpp"
#include "shapekern/socp/program.hpp"
#include "shapekern/socp/scaling.hpp"

namespace shapekern::socp {

struct AdmmSettings {
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;
    double eq_rho_factor = 1e3;
    int check_every = 10;
    int adapt_every = 50;
    double infeasibility_tol = 1e-7;
};

namespace detail {

// Euclidean distance of v to K (dual=false) or K* (dual=true), relative to |v|.
inline double cone_distance(const std::vector<Cone> &cones, const Eigen::VectorXd &v, bool dual) {
    const Eigen::VectorXd p = dual ? project_dual_cone(cones, v) : project_cone(cones, v);
    return (v - p).lpNorm<Eigen::Infinity>();
}

class AdmmKkt {
public:
    AdmmKkt(const SparseMatrix &A, double sigma) : A_(A), sigma_(sigma) {}

    bool factor(const Eigen::VectorXd &rho) {
        const auto n = A_.cols();
        const auto m = A_.rows();
        std::vector<Triplet> trip;
        trip.reserve(static_cast<std::size_t>(n + m + 2 * A_.nonZeros()));
        for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(j, j, sigma_);
        for (Eigen::Index i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -1.0 / rho[i]);
        for (int j = 0; j < A_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A_, j); it; ++it) {
                trip.emplace_back(n + it.row(), j, it.value());
                trip.emplace_back(j, n + it.row(), it.value());
            }
        }
        SparseMatrix K(n + m, n + m);
        K.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(K);
            analyzed_ = true;
        }
        ldlt_.factorize(K);
        return ldlt_.info() == Eigen::Success;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const { return ldlt_.solve(rhs); }

private:
    const SparseMatrix &A_;
    double sigma_;
    bool analyzed_ = false;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace detail

/// Operator-splitting solver: ADMM on  min c'x  s.t.  A x = z,  z in b - K,
/// with a cached quasi-definite factorisation, over-relaxation, adaptive rho
/// and divergence-based infeasibility certificates.
inline SolveReport solve_admm(const ConicProgram &prog, const SolverOptions &opts, const AdmmSettings &set = {}) {
    prog.validate();
    SolveReport rep;
    rep.method = "admm";
    const int n = prog.num_vars();
    const int m = prog.num_rows();
    const Equilibration eq = equilibrate(prog);
    const ConicProgram &P = eq.scaled;

    Eigen::VectorXd rho(m);
    Eigen::VectorXd rho_base_factor(m);
    {
        int r = 0;
        for (const auto &k : P.cones) {
            rho_base_factor.segment(r, k.dim).setConstant(k.kind == ConeKind::Zero ? set.eq_rho_factor : 1.0);
            r += k.dim;
        }
    }
    double rho_scalar = set.rho;
    rho = rho_scalar * rho_base_factor;

    detail::AdmmKkt kkt(P.A, set.sigma);
    if (!kkt.factor(rho)) {
        rep.status = Status::MaxIter;
        rep.message = "KKT factorisation failed";
        rep.primal = Eigen::VectorXd::Zero(n);
        rep.dual = Eigen::VectorXd::Zero(m);
        rep.slack = prog.b;
        fill_residuals(prog, rep);
        return rep;
    }

    const auto project_C = [&](const Eigen::VectorXd &v) {
        // C = b - K
        return Eigen::VectorXd(P.b - project_cone(P.cones, P.b - v));
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = project_C(Eigen::VectorXd::Zero(m));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd x_prev = x;
    Eigen::VectorXd y_prev = y;
    Eigen::VectorXd rhs(n + m);
    // Each rho change doubles the wait before the next one; frequent
    // refactorisations can otherwise cycle without converging.
    int adapt_every = set.adapt_every;
    int next_adapt = adapt_every;

    const auto make_report = [&](Status st, int it) {
        SolveReport r;
        r.method = "admm";
        r.status = st;
        r.iterations = it;
        r.primal = eq.unscale_x(x);
        r.slack = eq.unscale_s(P.b - z);
        r.dual = eq.unscale_y(y);
        fill_residuals(prog, r);
        return r;
    };

    for (int it = 1; it <= opts.max_iter; ++it) {
        x_prev = x;
        y_prev = y;
        rhs.head(n) = set.sigma * x - P.c;
        rhs.tail(m) = z - y.cwiseQuotient(rho);
        const Eigen::VectorXd sol = kkt.solve(rhs);
        const Eigen::VectorXd xt = sol.head(n);
        const Eigen::VectorXd zt = z + (sol.tail(m) - y).cwiseQuotient(rho);
        x = set.alpha * xt + (1.0 - set.alpha) * x;
        const Eigen::VectorXd zr = set.alpha * zt + (1.0 - set.alpha) * z;
        const Eigen::VectorXd z_new = project_C(zr + y.cwiseQuotient(rho));
        y += rho.cwiseProduct(zr - z_new);
        z = z_new;

        if (!x.allFinite() || !y.allFinite()) {
            auto r = make_report(Status::MaxIter, it);
            r.message = "numerical breakdown";
            return r;
        }

        if (it % set.check_every == 0 || it == opts.max_iter) {
            auto r = make_report(Status::MaxIter, it);
            if (r.primal_residual <= opts.tol && r.dual_residual <= opts.tol && r.gap <= opts.tol) {
                r.status = Status::Optimal;
                return r;
            }
            // Certificates from the successive differences.
            const Eigen::VectorXd dy = eq.unscale_y(y - y_prev);
            const double dyn = dy.size() ? dy.lpNorm<Eigen::Infinity>() : 0.0;
            if (dyn > 1e-12) {
                const Eigen::VectorXd aty = prog.A.transpose() * dy;
                const double aty_n = aty.size() ? aty.lpNorm<Eigen::Infinity>() : 0.0;
                if (aty_n <= set.infeasibility_tol * dyn && prog.b.dot(dy) < -set.infeasibility_tol * dyn &&
                    detail::cone_distance(prog.cones, dy, true) <= set.infeasibility_tol * dyn) {
                    r.status = Status::Infeasible;
                    r.dual = dy / dyn;
                    r.message = "primal infeasibility certificate";
                    return r;
                }
            }
            const Eigen::VectorXd dx = eq.unscale_x(x - x_prev);
            const double dxn = dx.size() ? dx.lpNorm<Eigen::Infinity>() : 0.0;
            if (dxn > 1e-12 && prog.c.dot(dx) < -set.infeasibility_tol * dxn) {
                const Eigen::VectorXd adx = -(prog.A * dx);
                if (detail::cone_distance(prog.cones, adx, false) <= set.infeasibility_tol * dxn) {
                    r.status = Status::Unbounded;
                    r.primal = dx / dxn;
                    r.message = "dual infeasibility certificate";
                    return r;
                }
            }
        }

        if (it == next_adapt) {
            next_adapt += adapt_every;
            const Eigen::VectorXd ax = P.A * x;
            const Eigen::VectorXd aty = P.A.transpose() * y;
            const auto inf = [](const Eigen::VectorXd &v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };
            const double rp = inf(ax - z) / std::max({inf(ax), inf(z), 1e-10});
            const double rd = inf(aty + P.c) / std::max({inf(aty), inf(P.c), 1e-10});
            const double ratio = std::sqrt(rp / std::max(rd, 1e-12));
            const double proposal = std::clamp(rho_scalar * ratio, 1e-6, 1e6);
            if (proposal > 5.0 * rho_scalar || proposal < 0.2 * rho_scalar) {
                rho_scalar = proposal;
                rho = rho_scalar * rho_base_factor;
                adapt_every *= 2;
                next_adapt = it + adapt_every;
                if (!kkt.factor(rho)) {
                    auto r = make_report(Status::MaxIter, it);
                    r.message = "KKT refactorisation failed";
                    return r;
                }
            }
        }
    }
    return make_report(Status::MaxIter, opts.max_iter);
}

}  // namespace shapekern::socp
