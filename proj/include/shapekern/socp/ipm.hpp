#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "shapekern/socp/cones.hpp"
#include "shapekern/socp/program.hpp"
#include "shapekern/socp/scaling.hpp"

namespace shapekern::socp {

struct IpmSettings {
    int max_iter = 100;
    double step_fraction = 0.99;
    double regularization = 1e-10;
    int refinement_steps = 3;
    bool equilibrate = true;
};

namespace detail {

// Nesterov-Todd scaling of one cone block.
struct BlockScaling {
    ConeKind kind = ConeKind::NonNeg;
    Eigen::VectorXd w;  // NonNeg: sqrt(s / z); SOC: normalised w_bar
    double eta = 1.0;
};

struct InequalityPart {
    std::vector<Cone> cones;
    std::vector<int> rows;  // original row of each inequality row
    SparseMatrix G;
    Eigen::VectorXd h;
};

struct EqualityPart {
    std::vector<int> rows;
    SparseMatrix A;
    Eigen::VectorXd b;
};

inline SparseMatrix select_rows(const SparseMatrix &A, const std::vector<int> &rows) {
    std::vector<int> where(A.rows(), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) where[rows[k]] = static_cast<int>(k);
    std::vector<Triplet> trip;
    for (int j = 0; j < A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
            if (where[it.row()] >= 0) trip.emplace_back(where[it.row()], j, it.value());
        }
    }
    SparseMatrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

inline double soc_residual(const Eigen::Ref<const Eigen::VectorXd> &u) {
    return u[0] - u.tail(u.size() - 1).norm();
}

// Largest alpha with u + alpha v in the cone block (u interior).
inline double max_step_soc(const Eigen::Ref<const Eigen::VectorXd> &u, const Eigen::Ref<const Eigen::VectorXd> &v) {
    const auto k = u.size() - 1;
    const double u1n = u.tail(k).norm();
    const double a = v[0] * v[0] - v.tail(k).squaredNorm();
    const double b = 2.0 * (u[0] * v[0] - u.tail(k).dot(v.tail(k)));
    const double c = (u[0] - u1n) * (u[0] + u1n);
    double best = std::numeric_limits<double>::infinity();
    const auto consider = [&](double r) {
        if (r > 0.0 && r < best) best = r;
    };
    if (std::abs(a) < 1e-300) {
        if (b < 0.0) consider(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (b + std::copysign(sq, b));
            if (q != 0.0) {
                consider(q / a);
                consider(c / q);
            }
        }
    }
    if (v[0] < 0.0) best = std::min(best, -u[0] / v[0]);
    return best;
}

class InteriorPoint {
public:
    InteriorPoint(const ConicProgram &p, const IpmSettings &set) : set_(set), n_(p.num_vars()) {
        int r = 0;
        for (const auto &k : p.cones) {
            for (int j = 0; j < k.dim; ++j) {
                if (k.kind == ConeKind::Zero) eq_.rows.push_back(r + j);
                else ineq_.rows.push_back(r + j);
            }
            if (k.kind != ConeKind::Zero) ineq_.cones.push_back(k);
            r += k.dim;
        }
        eq_.A = select_rows(p.A, eq_.rows);
        ineq_.G = select_rows(p.A, ineq_.rows);
        eq_.b.resize(static_cast<Eigen::Index>(eq_.rows.size()));
        ineq_.h.resize(static_cast<Eigen::Index>(ineq_.rows.size()));
        for (std::size_t k = 0; k < eq_.rows.size(); ++k) eq_.b[k] = p.b[eq_.rows[k]];
        for (std::size_t k = 0; k < ineq_.rows.size(); ++k) ineq_.h[k] = p.b[ineq_.rows[k]];
        c_ = p.c;
        Gt_ = ineq_.G.transpose();
        At_ = eq_.A.transpose();

        // Column support of each SOC block for the dense Schur updates.
        const SparseMatrix Grow = ineq_.G;  // column major: walk once
        r = 0;
        for (const auto &k : ineq_.cones) {
            std::vector<int> cols;
            if (k.kind == ConeKind::SOC) {
                std::set<int> support;
                for (int j = 0; j < Grow.outerSize(); ++j) {
                    for (SparseMatrix::InnerIterator it(Grow, j); it; ++it) {
                        if (it.row() >= r && it.row() < r + k.dim) support.insert(j);
                    }
                }
                cols.assign(support.begin(), support.end());
            }
            block_cols_.push_back(std::move(cols));
            block_start_.push_back(r);
            r += k.dim;
        }
        degree_ = 0;
        for (const auto &k : ineq_.cones) degree_ += k.kind == ConeKind::SOC ? 1 : k.dim;
    }

    SolveReport run(const ConicProgram &original, const Equilibration *eq, const SolverOptions &opts) {
        const int mi = static_cast<int>(ineq_.h.size());
        const int me = static_cast<int>(eq_.b.size());
        Eigen::VectorXd x(n_), y(me), s(mi), z(mi);

        // Initial point: least-squares primal and minimum-norm dual, shifted
        // into the cone interior.
        identity_scaling();
        if (!factor()) return failure(original, eq, 0, "KKT factorisation failed");
        {
            Eigen::VectorXd dx, dy, dz;
            kkt_solve(Eigen::VectorXd::Zero(n_), eq_.b, ineq_.h, dx, dy, dz);
            x = dx;
            s = -dz;
            kkt_solve(-c_, Eigen::VectorXd::Zero(me), Eigen::VectorXd::Zero(mi), dx, dy, dz);
            y = dy;
            z = dz;
            shift_into_cone(s);
            shift_into_cone(z);
        }

        SolveReport best;
        double best_res = std::numeric_limits<double>::infinity();
        const auto worst = [](const SolveReport &r) { return std::max({r.primal_residual, r.dual_residual, r.gap}); };
        for (int it = 0; it <= std::min(opts.max_iter, set_.max_iter); ++it) {
            const Eigen::VectorXd rx = c_ + At_ * y + Gt_ * z;
            const Eigen::VectorXd ry = eq_.A * x - eq_.b;
            const Eigen::VectorXd rz = ineq_.G * x + s - ineq_.h;

            SolveReport rep = make_report(original, eq, x, y, s, z, it);
            if (opts.verbose) {
                std::fprintf(stderr, "ipm %3d  pcost % .9e  pres %.2e  dres %.2e  gap %.2e  mu %.2e\n", it, rep.objective,
                             rep.primal_residual, rep.dual_residual, rep.gap, degree_ ? s.dot(z) / degree_ : 0.0);
            }
            if (rep.primal_residual <= opts.tol && rep.dual_residual <= opts.tol && rep.gap <= opts.tol) {
                rep.status = Status::Optimal;
                return rep;
            }
            if (auto cert = certificates(original, eq, x, y, s, z, it, opts.tol)) return *cert;
            if (worst(rep) < best_res) {
                best_res = worst(rep);
                best = rep;
            }
            if (it == std::min(opts.max_iter, set_.max_iter)) {
                best.message = "iteration limit";
                return best;
            }

            const double mu = degree_ > 0 ? s.dot(z) / degree_ : 0.0;
            if (!compute_scaling(s, z)) return stalled(best, "lost cone interior");
            const Eigen::VectorXd lambda = apply_W(z);
            if (!factor()) return stalled(best, "KKT factorisation failed");

            // Predictor.
            const Eigen::VectorXd ll = jordan(lambda, lambda);
            Eigen::VectorXd dxa, dya, dza, dsa;
            newton(rx, ry, rz, lambda, -ll, dxa, dya, dza, dsa);
            const double alpha_aff = std::min(1.0, max_step(s, z, dsa, dza));
            const double sigma = std::pow(std::clamp(1.0 - alpha_aff, 0.0, 1.0), 3);

            // Corrector.
            Eigen::VectorXd target = -ll - jordan(apply_Winv(dsa), apply_W(dza));
            add_identity(target, sigma * mu);
            Eigen::VectorXd dx, dy, dz, ds;
            newton(rx, ry, rz, lambda, target, dx, dy, dz, ds);
            const double alpha = std::min(1.0, set_.step_fraction * max_step(s, z, ds, dz));
            if (!(alpha > 0.0) || !dx.allFinite()) return stalled(best, "step computation failed");

            x += alpha * dx;
            y += alpha * dy;
            s += alpha * ds;
            z += alpha * dz;
        }
        return failure(original, eq, set_.max_iter, "iteration limit");
    }

private:
    IpmSettings set_;
    int n_;
    Eigen::VectorXd c_;
    EqualityPart eq_;
    InequalityPart ineq_;
    SparseMatrix Gt_, At_;
    std::vector<std::vector<int>> block_cols_;
    std::vector<int> block_start_;
    int degree_ = 0;
    std::vector<BlockScaling> scaling_;
    SparseMatrix K_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;

    void identity_scaling() {
        scaling_.clear();
        for (const auto &k : ineq_.cones) {
            BlockScaling b;
            b.kind = k.kind;
            if (k.kind == ConeKind::NonNeg) {
                b.w = Eigen::VectorXd::Ones(k.dim);
            } else {
                b.w = Eigen::VectorXd::Unit(k.dim, 0);
            }
            scaling_.push_back(std::move(b));
        }
    }

    bool compute_scaling(const Eigen::VectorXd &s, const Eigen::VectorXd &z) {
        scaling_.clear();
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const auto &cone = ineq_.cones[k];
            const auto ss = s.segment(block_start_[k], cone.dim);
            const auto zz = z.segment(block_start_[k], cone.dim);
            BlockScaling b;
            b.kind = cone.kind;
            if (cone.kind == ConeKind::NonNeg) {
                if ((ss.array() <= 0.0).any() || (zz.array() <= 0.0).any()) return false;
                b.w = (ss.array() / zz.array()).sqrt();
            } else {
                const auto d = cone.dim - 1;
                const double sn2 = (ss[0] - ss.tail(d).norm()) * (ss[0] + ss.tail(d).norm());
                const double zn2 = (zz[0] - zz.tail(d).norm()) * (zz[0] + zz.tail(d).norm());
                if (!(sn2 > 0.0) || !(zn2 > 0.0) || ss[0] <= 0.0 || zz[0] <= 0.0) return false;
                const double sn = std::sqrt(sn2);
                const double zn = std::sqrt(zn2);
                const Eigen::VectorXd sb = ss / sn;
                const Eigen::VectorXd zb = zz / zn;
                const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
                Eigen::VectorXd wb(cone.dim);
                wb[0] = (sb[0] + zb[0]) / (2.0 * gamma);
                wb.tail(d) = (sb.tail(d) - zb.tail(d)) / (2.0 * gamma);
                b.w = wb;
                b.eta = std::sqrt(sn / zn);
            }
            scaling_.push_back(std::move(b));
        }
        return true;
    }

    // W v, W^{-1} v block by block.
    [[nodiscard]] Eigen::VectorXd apply_block(std::size_t k, const Eigen::Ref<const Eigen::VectorXd> &v,
                                              bool inverse) const {
        const auto &b = scaling_[k];
        if (b.kind == ConeKind::NonNeg) return inverse ? Eigen::VectorXd(v.cwiseQuotient(b.w)) : Eigen::VectorXd(v.cwiseProduct(b.w));
        const auto d = v.size() - 1;
        const double w0 = b.w[0];
        const auto w1 = b.w.tail(d);
        const double sign = inverse ? -1.0 : 1.0;
        const double v0 = v[0];
        const double w1v1 = w1.dot(v.tail(d));
        Eigen::VectorXd out(v.size());
        out[0] = w0 * v0 + sign * w1v1;
        out.tail(d) = v.tail(d) + (sign * v0 + w1v1 / (1.0 + w0)) * w1;
        return inverse ? Eigen::VectorXd(out / b.eta) : Eigen::VectorXd(out * b.eta);
    }

    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd &v, bool inverse) const {
        Eigen::VectorXd out(v.size());
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int d = ineq_.cones[k].dim;
            out.segment(block_start_[k], d) = apply_block(k, v.segment(block_start_[k], d), inverse);
        }
        return out;
    }
    [[nodiscard]] Eigen::VectorXd apply_W(const Eigen::VectorXd &v) const { return apply(v, false); }
    [[nodiscard]] Eigen::VectorXd apply_Winv(const Eigen::VectorXd &v) const { return apply(v, true); }

    [[nodiscard]] Eigen::VectorXd jordan(const Eigen::VectorXd &u, const Eigen::VectorXd &v) const {
        Eigen::VectorXd out(u.size());
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int r = block_start_[k];
            const int d = ineq_.cones[k].dim;
            if (ineq_.cones[k].kind == ConeKind::NonNeg) {
                out.segment(r, d) = u.segment(r, d).cwiseProduct(v.segment(r, d));
            } else {
                out[r] = u.segment(r, d).dot(v.segment(r, d));
                out.segment(r + 1, d - 1) = u[r] * v.segment(r + 1, d - 1) + v[r] * u.segment(r + 1, d - 1);
            }
        }
        return out;
    }

    // Solve lambda o u = d.
    [[nodiscard]] Eigen::VectorXd jordan_div(const Eigen::VectorXd &lambda, const Eigen::VectorXd &d) const {
        Eigen::VectorXd out(d.size());
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int r = block_start_[k];
            const int dim = ineq_.cones[k].dim;
            if (ineq_.cones[k].kind == ConeKind::NonNeg) {
                out.segment(r, dim) = d.segment(r, dim).cwiseQuotient(lambda.segment(r, dim));
            } else {
                const double l0 = lambda[r];
                const auto l1 = lambda.segment(r + 1, dim - 1);
                const double det = (l0 - l1.norm()) * (l0 + l1.norm());
                const double u0 = (l0 * d[r] - l1.dot(d.segment(r + 1, dim - 1))) / det;
                out[r] = u0;
                out.segment(r + 1, dim - 1) = (d.segment(r + 1, dim - 1) - u0 * l1) / l0;
            }
        }
        return out;
    }

    void add_identity(Eigen::VectorXd &v, double t) const {
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int r = block_start_[k];
            if (ineq_.cones[k].kind == ConeKind::NonNeg) v.segment(r, ineq_.cones[k].dim).array() += t;
            else v[r] += t;
        }
    }

    void shift_into_cone(Eigen::VectorXd &v) const {
        double alpha = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int r = block_start_[k];
            const int d = ineq_.cones[k].dim;
            const double e = ineq_.cones[k].kind == ConeKind::NonNeg ? -v.segment(r, d).minCoeff()
                                                                    : -soc_residual(v.segment(r, d));
            alpha = std::max(alpha, e);
        }
        if (alpha >= -1e-8) add_identity(v, 1.0 + std::max(alpha, 0.0));
    }

    [[nodiscard]] double max_step(const Eigen::VectorXd &s, const Eigen::VectorXd &z, const Eigen::VectorXd &ds,
                                  const Eigen::VectorXd &dz) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            const int r = block_start_[k];
            const int d = ineq_.cones[k].dim;
            if (ineq_.cones[k].kind == ConeKind::NonNeg) {
                for (int j = r; j < r + d; ++j) {
                    if (ds[j] < 0.0) best = std::min(best, -s[j] / ds[j]);
                    if (dz[j] < 0.0) best = std::min(best, -z[j] / dz[j]);
                }
            } else {
                best = std::min(best, max_step_soc(s.segment(r, d), ds.segment(r, d)));
                best = std::min(best, max_step_soc(z.segment(r, d), dz.segment(r, d)));
            }
        }
        return best;
    }

    // Reduced KKT  [H + dI, A'; A, -dI]  with  H = G' W^{-2} G.
    bool factor() {
        const int me = static_cast<int>(eq_.b.size());
        std::vector<Triplet> trip;
        // Non-negative rows: sum_i g_i g_i' / w_i^2.
        {
            Eigen::VectorXd dinv = Eigen::VectorXd::Zero(ineq_.h.size());
            for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
                if (ineq_.cones[k].kind == ConeKind::NonNeg) {
                    dinv.segment(block_start_[k], ineq_.cones[k].dim) = scaling_[k].w.cwiseInverse().cwiseAbs2();
                }
            }
            const SparseMatrix Hnn = Gt_ * dinv.asDiagonal() * ineq_.G;
            for (int j = 0; j < Hnn.outerSize(); ++j) {
                for (SparseMatrix::InnerIterator it(Hnn, j); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
            }
        }
        for (std::size_t k = 0; k < ineq_.cones.size(); ++k) {
            if (ineq_.cones[k].kind != ConeKind::SOC) continue;
            const auto &cols = block_cols_[k];
            const int r = block_start_[k];
            const int d = ineq_.cones[k].dim;
            Eigen::MatrixXd Mk(d, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) {
                Eigen::VectorXd g = Eigen::VectorXd(ineq_.G.col(cols[j])).segment(r, d);
                Mk.col(static_cast<Eigen::Index>(j)) = apply_block(k, g, true);
            }
            const Eigen::MatrixXd Hk = Mk.transpose() * Mk;
            for (std::size_t a = 0; a < cols.size(); ++a) {
                for (std::size_t b = 0; b < cols.size(); ++b) trip.emplace_back(cols[a], cols[b], Hk(a, b));
            }
        }
        for (int j = 0; j < n_; ++j) trip.emplace_back(j, j, set_.regularization);
        for (int j = 0; j < At_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(At_, j); it; ++it) {
                trip.emplace_back(it.row(), n_ + j, it.value());
                trip.emplace_back(n_ + j, it.row(), it.value());
            }
        }
        for (int i = 0; i < me; ++i) trip.emplace_back(n_ + i, n_ + i, -set_.regularization);
        K_.resize(n_ + me, n_ + me);
        K_.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(K_);
            analyzed_ = true;
        }
        ldlt_.factorize(K_);
        return ldlt_.info() == Eigen::Success;
    }

    // One pass through the factorised reduced system.
    void reduced_solve(const Eigen::VectorXd &rx, const Eigen::VectorXd &ry, const Eigen::VectorXd &rz,
                       Eigen::VectorXd &dx, Eigen::VectorXd &dy, Eigen::VectorXd &dz) const {
        const int me = static_cast<int>(eq_.b.size());
        Eigen::VectorXd rhs(n_ + me);
        rhs.head(n_) = rx + Gt_ * apply_Winv(apply_Winv(rz));
        rhs.tail(me) = ry;
        const Eigen::VectorXd sol = ldlt_.solve(rhs);
        dx = sol.head(n_);
        dy = sol.tail(me);
        dz = apply_Winv(apply_Winv(ineq_.G * dx - rz));
    }

    // Solves  A'dy + G'dz = rx,  A dx = ry,  G dx - W^2 dz = rz,  refining
    // against the full (unreduced, unregularised) system.
    void kkt_solve(const Eigen::VectorXd &rx, const Eigen::VectorXd &ry, const Eigen::VectorXd &rz,
                   Eigen::VectorXd &dx, Eigen::VectorXd &dy, Eigen::VectorXd &dz) const {
        reduced_solve(rx, ry, rz, dx, dy, dz);
        Eigen::VectorXd cx, cy, cz;
        for (int r = 0; r < set_.refinement_steps; ++r) {
            const Eigen::VectorXd ex = rx - At_ * dy - Gt_ * dz;
            const Eigen::VectorXd ey = ry - eq_.A * dx;
            const Eigen::VectorXd ez = rz - ineq_.G * dx + apply_W(apply_W(dz));
            reduced_solve(ex, ey, ez, cx, cy, cz);
            dx += cx;
            dy += cy;
            dz += cz;
        }
    }

    void newton(const Eigen::VectorXd &rx, const Eigen::VectorXd &ry, const Eigen::VectorXd &rz,
                const Eigen::VectorXd &lambda, const Eigen::VectorXd &target, Eigen::VectorXd &dx, Eigen::VectorXd &dy,
                Eigen::VectorXd &dz, Eigen::VectorXd &ds) const {
        const Eigen::VectorXd u = jordan_div(lambda, target);
        const Eigen::VectorXd Wu = apply_W(u);
        kkt_solve(-rx, -ry, -rz - Wu, dx, dy, dz);
        ds = Wu - apply_W(apply_W(dz));
    }

    [[nodiscard]] SolveReport make_report(const ConicProgram &original, const Equilibration *eq,
                                          const Eigen::VectorXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &s,
                                          const Eigen::VectorXd &z, int it) const {
        const int m = original.num_rows();
        Eigen::VectorXd yf(m), sf(m);
        for (std::size_t k = 0; k < eq_.rows.size(); ++k) {
            yf[eq_.rows[k]] = y[static_cast<Eigen::Index>(k)];
            sf[eq_.rows[k]] = 0.0;
        }
        for (std::size_t k = 0; k < ineq_.rows.size(); ++k) {
            yf[ineq_.rows[k]] = z[static_cast<Eigen::Index>(k)];
            sf[ineq_.rows[k]] = s[static_cast<Eigen::Index>(k)];
        }
        SolveReport rep;
        rep.method = "interior-point";
        rep.iterations = it;
        if (eq) {
            rep.primal = eq->unscale_x(x);
            rep.slack = eq->unscale_s(sf);
            rep.dual = eq->unscale_y(yf);
        } else {
            rep.primal = x;
            rep.slack = sf;
            rep.dual = yf;
        }
        fill_residuals(original, rep);
        return rep;
    }

    [[nodiscard]] std::optional<SolveReport> certificates(const ConicProgram &original, const Equilibration *eq,
                                                          const Eigen::VectorXd &x, const Eigen::VectorXd &y,
                                                          const Eigen::VectorXd &s, const Eigen::VectorXd &z, int it,
                                                          double tol) const {
        const double hz = ineq_.h.dot(z) + eq_.b.dot(y);
        if (hz < 0.0) {
            const double res = (At_ * y + Gt_ * z).lpNorm<Eigen::Infinity>();
            if (res / -hz <= tol) {
                SolveReport rep = make_report(original, eq, x, y / -hz, s, z / -hz, it);
                rep.status = Status::Infeasible;
                rep.message = "primal infeasibility certificate";
                return rep;
            }
        }
        const double cx = c_.dot(x);
        if (cx < 0.0) {
            const double res = std::max((ineq_.G * x + s).lpNorm<Eigen::Infinity>(),
                                        eq_.b.size() ? (eq_.A * x).lpNorm<Eigen::Infinity>() : 0.0);
            if (res / -cx <= tol) {
                SolveReport rep = make_report(original, eq, x / -cx, y, s / -cx, z, it);
                rep.status = Status::Unbounded;
                rep.message = "dual infeasibility certificate";
                return rep;
            }
        }
        return std::nullopt;
    }

    // Progress stopped: hand back the best iterate seen.
    static SolveReport stalled(SolveReport best, const char *why) {
        best.status = Status::MaxIter;
        best.message = why;
        return best;
    }

    [[nodiscard]] SolveReport failure(const ConicProgram &original, const Equilibration *eq, int it,
                                      const char *why) const {
        SolveReport rep;
        rep.method = "interior-point";
        rep.status = Status::MaxIter;
        rep.iterations = it;
        rep.primal = Eigen::VectorXd::Zero(original.num_vars());
        rep.dual = Eigen::VectorXd::Zero(original.num_rows());
        rep.slack = original.b;
        fill_residuals(original, rep);
        rep.message = why;
        (void)eq;
        return rep;
    }
};

}  // namespace detail

/// Primal-dual interior-point solver with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps.
inline SolveReport solve_interior_point(const ConicProgram &prog, const SolverOptions &opts,
                                        const IpmSettings &set = {}) {
    prog.validate();
    if (set.equilibrate) {
        const Equilibration eq = equilibrate(prog);
        detail::InteriorPoint ipm(eq.scaled, set);
        return ipm.run(prog, &eq, opts);
    }
    detail::InteriorPoint ipm(prog, set);
    return ipm.run(prog, nullptr, opts);
}

}  // namespace shapekern::socp
