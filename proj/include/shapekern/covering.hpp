#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "shapekern/kernels.hpp"
#include "shapekern/shapes.hpp"

namespace shapekern {

enum class Norm { L2, Linf };

inline double norm_of(const Eigen::VectorXd &v, Norm norm) {
    return norm == Norm::L2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

/// Centers with their (possibly non-uniform) covering radii.
struct Net {
    PointSet centers;
    Eigen::VectorXd radii;

    [[nodiscard]] int size() const { return static_cast<int>(centers.rows()); }
};

/// Per-constraint nets plus the buffers eta_{i,m} of the tightened constraints.
struct Covering {
    Norm norm = Norm::L2;
    std::vector<Net> nets;
    std::vector<Eigen::VectorXd> eta;

    [[nodiscard]] int num_constraints() const { return static_cast<int>(nets.size()); }

    [[nodiscard]] int total_centers() const {
        int m = 0;
        for (const auto &n : nets) m += n.size();
        return m;
    }

    /// Offset of constraint i's first center in the stacked center list.
    [[nodiscard]] int offset(int i) const {
        int m = 0;
        for (int k = 0; k < i; ++k) m += nets[k].size();
        return m;
    }

    [[nodiscard]] double eta_max(int i) const { return eta[i].size() ? eta[i].maxCoeff() : 0.0; }

    [[nodiscard]] double eta_inf() const {
        double e = 0.0;
        for (int i = 0; i < num_constraints(); ++i) e = std::max(e, eta_max(i));
        return e;
    }
};

namespace detail {

// Deterministic 64-bit generator; the standard distributions are
// implementation-defined, so uniform draws are derived by hand.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t state_;
};

inline PointSet uniform_in_box(const CompactBox &box, int count, std::uint64_t seed) {
    SplitMix64 rng(seed);
    PointSet pts(count, box.dim());
    for (int n = 0; n < count; ++n) {
        for (int j = 0; j < box.dim(); ++j) pts(n, j) = box.lower[j] + rng.uniform() * (box.upper[j] - box.lower[j]);
    }
    return pts;
}

// Tensor grid with `per_axis[j]` cell-centered nodes on axis j.
inline PointSet cell_centered_grid(const CompactBox &box, const std::vector<int> &per_axis) {
    const int d = box.dim();
    long total = 1;
    for (int c : per_axis) total *= c;
    PointSet pts(total, d);
    std::vector<int> idx(d, 0);
    for (long n = 0; n < total; ++n) {
        for (int j = 0; j < d; ++j) {
            const double w = box.upper[j] - box.lower[j];
            pts(n, j) = box.lower[j] + (idx[j] + 0.5) * w / per_axis[j];
        }
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < per_axis[j]) break;
            idx[j] = 0;
        }
    }
    return pts;
}

// Grid with `per_axis` nodes per axis including both endpoints (single
// midpoint when per_axis == 1 or the axis is degenerate).
inline PointSet closed_grid(const CompactBox &box, int per_axis) {
    const int d = box.dim();
    long total = 1;
    for (int j = 0; j < d; ++j) total *= per_axis;
    PointSet pts(total, d);
    std::vector<int> idx(d, 0);
    for (long n = 0; n < total; ++n) {
        for (int j = 0; j < d; ++j) {
            pts(n, j) = per_axis == 1 ? 0.5 * (box.lower[j] + box.upper[j])
                                      : box.lower[j] + (box.upper[j] - box.lower[j]) * idx[j] / (per_axis - 1);
        }
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < per_axis) break;
            idx[j] = 0;
        }
    }
    return pts;
}

inline double distance(const PointRef &a, const PointRef &b, Norm norm) {
    return norm == Norm::L2 ? (a - b).norm() : (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace detail

/// Uniform delta-net of a box: a cell-centered grid whose cells fit inside the
/// delta-ball of their center in the chosen norm. All radii equal delta.
inline Net uniform_box_net(const CompactBox &box, double delta, Norm norm) {
    box.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("net radius must be positive");
    const int d = box.dim();
    // Largest half-width per axis whose cube still sits in the delta-ball.
    const double half = norm == Norm::Linf ? delta : delta / std::sqrt(static_cast<double>(d));
    std::vector<int> per_axis(d);
    for (int j = 0; j < d; ++j) {
        const double w = box.upper[j] - box.lower[j];
        // The epsilon keeps exact multiples (w = 2 * half * k) from rounding up.
        per_axis[j] = std::max(1, static_cast<int>(std::ceil(w / (2.0 * half) - 1e-12)));
    }
    Net net;
    net.centers = detail::cell_centered_grid(box, per_axis);
    net.radii = Eigen::VectorXd::Constant(net.centers.rows(), delta);
    return net;
}

/// Grid with `per_axis` centers on every axis and the tightest radius that
/// covers each cell.
inline Net grid_net(const CompactBox &box, int per_axis, Norm norm) {
    box.validate();
    if (per_axis < 1) throw std::invalid_argument("need at least one center per axis");
    const int d = box.dim();
    Net net;
    net.centers = detail::cell_centered_grid(box, std::vector<int>(d, per_axis));
    const Eigen::VectorXd half = box.widths() / (2.0 * per_axis);
    net.radii = Eigen::VectorXd::Constant(net.centers.rows(), norm_of(half, norm));
    return net;
}

/// Grid with nodes l + k (u - l) / per_axis, k = 0..per_axis-1, on every axis.
/// Doubling `per_axis` keeps every node, so the nets of a doubling ladder are
/// nested. Each node covers the cell to its right (the last node on an axis
/// reaches the upper edge), which fixes its radius.
inline Net anchored_grid_net(const CompactBox &box, int per_axis, Norm norm) {
    box.validate();
    if (per_axis < 1) throw std::invalid_argument("need at least one center per axis");
    const int d = box.dim();
    long total = 1;
    for (int j = 0; j < d; ++j) total *= per_axis;
    Net net;
    net.centers.resize(total, d);
    net.radii.resize(total);
    const Eigen::VectorXd h = box.widths() / per_axis;
    std::vector<int> idx(d, 0);
    for (long n = 0; n < total; ++n) {
        Eigen::VectorXd reach(d);
        for (int j = 0; j < d; ++j) {
            net.centers(n, j) = box.lower[j] + idx[j] * h[j];
            reach[j] = idx[j] + 1 == per_axis ? h[j] : 0.5 * h[j];
        }
        net.radii[n] = norm_of(reach, norm);
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < per_axis) break;
            idx[j] = 0;
        }
    }
    return net;
}

namespace detail {

// Covering radius of each center's Voronoi cell, estimated from dense probes.
inline Eigen::VectorXd voronoi_radii(const CompactBox &box, const PointSet &centers, Norm norm) {
    const int d = box.dim();
    const int per_axis = std::max(2, static_cast<int>(std::ceil(std::pow(20000.0, 1.0 / d))));
    PointSet probes(0, d);
    {
        PointSet grid = closed_grid(box, per_axis);
        PointSet rnd = uniform_in_box(box, 20000, 0x5eedULL);
        probes.resize(grid.rows() + rnd.rows(), d);
        probes << grid, rnd;
    }
    Eigen::VectorXd radii = Eigen::VectorXd::Zero(centers.rows());
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = 0;
        for (Eigen::Index m = 0; m < centers.rows(); ++m) {
            const double dist = distance(probes.row(p).transpose(), centers.row(m).transpose(), norm);
            if (dist < best) {
                best = dist;
                arg = m;
            }
        }
        radii[arg] = std::max(radii[arg], best);
    }
    radii *= 1.05;
    // Centers whose cell received no probe keep a small positive radius.
    for (Eigen::Index m = 0; m < centers.rows(); ++m) {
        if (radii[m] > 0.0) continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < centers.rows(); ++k) {
            if (k != m) nearest = std::min(nearest, distance(centers.row(m).transpose(), centers.row(k).transpose(), norm));
        }
        radii[m] = std::isfinite(nearest) && nearest > 0.0 ? 0.5 * nearest : norm_of(box.widths(), norm);
    }
    return radii;
}

}  // namespace detail

/// Net that reuses the samples lying in the box as centers and inserts at most
/// `max_added` virtual centers by greedy farthest-point insertion.
///
/// In one dimension the radii are exact: each center covers up to the midpoint
/// of its neighbours (or to the box edge). In higher dimensions the radius of
/// each center is the covering radius of its Voronoi cell, estimated on dense
/// probes and inflated by 5%.
inline Net recycled_net(const CompactBox &box, const PointSet &samples_in_box, int max_added, Norm norm) {
    box.validate();
    if (max_added < 0) throw std::invalid_argument("max_added must be non-negative");
    const int d = box.dim();

    std::vector<Eigen::VectorXd> centers;
    for (Eigen::Index n = 0; n < samples_in_box.rows(); ++n) {
        Eigen::VectorXd x = samples_in_box.row(n).transpose();
        if (!box.contains(x)) continue;
        const bool dup = std::any_of(centers.begin(), centers.end(), [&](const Eigen::VectorXd &c) { return c == x; });
        if (!dup) centers.push_back(std::move(x));
    }

    if (centers.empty()) {
        const int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(max_added, 1.0 / d) + 1e-9)));
        return grid_net(box, per_axis, norm);
    }

    if (d == 1) {
        std::vector<double> xs;
        for (const auto &c : centers) xs.push_back(c[0]);
        std::sort(xs.begin(), xs.end());
        const double lo = box.lower[0];
        const double hi = box.upper[0];
        for (int added = 0; added < max_added; ++added) {
            // Farthest point of the box from the current centers.
            double best = xs.front() - lo;
            double where = lo;
            if (hi - xs.back() > best) {
                best = hi - xs.back();
                where = hi;
            }
            for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
                const double half_gap = 0.5 * (xs[k + 1] - xs[k]);
                if (half_gap > best) {
                    best = half_gap;
                    where = xs[k] + half_gap;
                }
            }
            if (best <= 0.0) break;
            xs.insert(std::upper_bound(xs.begin(), xs.end(), where), where);
        }
        Net net;
        const auto m = static_cast<Eigen::Index>(xs.size());
        net.centers.resize(m, 1);
        net.radii.resize(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            net.centers(k, 0) = xs[k];
            const double left = k == 0 ? xs[k] - lo : 0.5 * (xs[k] - xs[k - 1]);
            const double right = k + 1 == m ? hi - xs[k] : 0.5 * (xs[k + 1] - xs[k]);
            net.radii[k] = std::max(left, right);
        }
        return net;
    }

    if (max_added > 0) {
        const int per_axis = std::max(2, static_cast<int>(std::ceil(std::pow(4096.0, 1.0 / d))));
        const PointSet candidates = detail::closed_grid(box, per_axis);
        Eigen::VectorXd nearest(candidates.rows());
        for (Eigen::Index p = 0; p < candidates.rows(); ++p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto &c : centers) best = std::min(best, detail::distance(candidates.row(p).transpose(), c, norm));
            nearest[p] = best;
        }
        for (int added = 0; added < max_added; ++added) {
            Eigen::Index arg = 0;
            const double far = nearest.maxCoeff(&arg);
            if (far <= 0.0) break;
            Eigen::VectorXd c = candidates.row(arg).transpose();
            for (Eigen::Index p = 0; p < candidates.rows(); ++p) {
                nearest[p] = std::min(nearest[p], detail::distance(candidates.row(p).transpose(), c, norm));
            }
            centers.push_back(std::move(c));
        }
    }

    Net net;
    net.centers.resize(static_cast<Eigen::Index>(centers.size()), d);
    for (std::size_t m = 0; m < centers.size(); ++m) net.centers.row(static_cast<Eigen::Index>(m)) = centers[m].transpose();
    net.radii = detail::voronoi_radii(box, net.centers, norm);
    return net;
}

/// Upper bound sqrt(2 L delta) on the buffer when D_x D_y k0 is L-Lipschitz on
/// the delta-ball.
inline double eta_lipschitz_bound(double lipschitz, double delta) {
    if (lipschitz < 0.0 || delta < 0.0) throw std::invalid_argument("Lipschitz constant and radius must be >= 0");
    return std::sqrt(2.0 * lipschitz * delta);
}

namespace detail {

// |Phi_D(c) - Phi_D(c + v)|_k^2 where Phi_D(x) = D_x k(x, .).
inline double feature_gap_sq(const KernelSpec &spec, const DifferentialOperator &op, const Eigen::VectorXd &c,
                             const Eigen::VectorXd &v) {
    const Eigen::VectorXd p = c + v;
    if (spec.shift_invariant()) {
        const double at0 = eval_derivative_kernel(spec, op, op, c, c);
        const double atv = eval_derivative_kernel(spec, op, op, c, p);
        return std::abs(2.0 * at0 - 2.0 * atv);
    }
    const double a = eval_derivative_kernel(spec, op, op, c, c);
    const double b = eval_derivative_kernel(spec, op, op, c, p);
    const double e = eval_derivative_kernel(spec, op, op, p, p);
    return std::abs(a - 2.0 * b + e);
}

// sup over t in [0, 1] of feature_gap_sq(c + t * v): coarse scan then golden
// section refinement around the best node.
inline double radial_sup(const KernelSpec &spec, const DifferentialOperator &op, const Eigen::VectorXd &c,
                         const Eigen::VectorXd &v) {
    constexpr int kNodes = 64;
    const auto f = [&](double t) { return feature_gap_sq(spec, op, c, t * v); };
    int best_k = kNodes;
    double best = f(1.0);
    for (int k = 1; k < kNodes; ++k) {
        const double val = f(static_cast<double>(k) / kNodes);
        if (val > best) {
            best = val;
            best_k = k;
        }
    }
    if (best_k == kNodes) return best;
    double a = static_cast<double>(best_k - 1) / kNodes;
    double b = static_cast<double>(best_k + 1) / kNodes;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    return std::max({best, f1, f2});
}

}  // namespace detail

/// Safety factor applied to the buffer when the direction supremum is sampled
/// rather than exact.
inline constexpr double kEtaInflation = 1.01;

/// Buffer eta = sup_{|u| <= 1} |D_x k(c, .) - D_x k(c + delta u, .)|_k.
///
/// The supremum is exact (up to the radial search) when the problem only
/// depends on |u|_2 or when d = 1; otherwise it is taken over
/// `n_sphere_samples` boundary directions and inflated by kEtaInflation.
inline double compute_eta(const KernelSpec &spec, const DifferentialOperator &op, const PointRef &center,
                          double delta, Norm norm, int n_sphere_samples = 256) {
    if (delta < 0.0) throw std::invalid_argument("radius must be non-negative");
    check_operator(spec, op, center.size());
    if (delta == 0.0) return 0.0;
    const int d = static_cast<int>(center.size());
    const Eigen::VectorXd c = center;

    const bool isotropic = spec.family == KernelFamily::Gaussian && op.is_identity();
    if (isotropic || d == 1) {
        // Radius reach of the unit ball in the Euclidean metric.
        const double reach = (norm == Norm::Linf && d > 1) ? std::sqrt(static_cast<double>(d)) : 1.0;
        double sup = 0.0;
        if (isotropic) {
            sup = detail::radial_sup(spec, op, c, Eigen::VectorXd::Unit(d, 0) * (delta * reach));
        } else {
            const Eigen::VectorXd e = Eigen::VectorXd::Constant(1, delta);
            sup = std::max(detail::radial_sup(spec, op, c, e), detail::radial_sup(spec, op, c, -e));
        }
        if (!std::isfinite(sup)) throw NumericError("non-finite buffer");
        return std::sqrt(sup);
    }

    std::vector<Eigen::VectorXd> dirs;
    for (int j = 0; j < d; ++j) {
        dirs.push_back(Eigen::VectorXd::Unit(d, j));
        dirs.push_back(-Eigen::VectorXd::Unit(d, j));
    }
    if (d == 2) {
        for (int k = 0; k < n_sphere_samples; ++k) {
            const double th = 2.0 * M_PI * k / n_sphere_samples;
            Eigen::VectorXd u(2);
            u << std::cos(th), std::sin(th);
            dirs.push_back(u);
        }
    } else {
        detail::SplitMix64 rng(0xe7aULL + static_cast<std::uint64_t>(d));
        for (int k = 0; k < n_sphere_samples; ++k) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.normal();
            dirs.push_back(u.normalized());
        }
    }
    if (norm == Norm::Linf) {
        // Unit cube surface: rescale directions and add the corners.
        for (auto &u : dirs) u /= u.lpNorm<Eigen::Infinity>();
        for (int mask = 0; mask < (1 << d); ++mask) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u[j] = (mask >> j) & 1 ? 1.0 : -1.0;
            dirs.push_back(u);
        }
    }
    double sup = 0.0;
    for (const auto &u : dirs) sup = std::max(sup, detail::radial_sup(spec, op, c, delta * u));
    if (!std::isfinite(sup)) throw NumericError("non-finite buffer");
    return kEtaInflation * std::sqrt(sup);
}

enum class EtaMode {
    PerCenter,   // eta_{i,m} from each center's own radius
    UniformMax,  // eta_i = max_m eta_{i,m} for every center of constraint i
};

/// Attaches buffers to one net per constraint.
inline Covering make_covering(const ConstraintSystem &system, const KernelSpec &spec, std::vector<Net> nets,
                              Norm norm, EtaMode mode = EtaMode::PerCenter, int n_sphere_samples = 256) {
    if (static_cast<int>(nets.size()) != system.size()) {
        throw std::invalid_argument("one net per constraint is required");
    }
    Covering cov;
    cov.norm = norm;
    cov.nets = std::move(nets);
    for (int i = 0; i < system.size(); ++i) {
        const auto &net = cov.nets[i];
        const auto &con = system.constraints[i];
        if (net.centers.cols() != con.domain.dim() && net.size() > 0) {
            throw std::invalid_argument("net dimension does not match constraint domain");
        }
        if (net.size() == 0) throw std::invalid_argument("every constraint needs at least one center");
        Eigen::VectorXd eta(net.size());
        for (int m = 0; m < net.size(); ++m) {
            eta[m] = compute_eta(spec, con.op, net.centers.row(m).transpose(), net.radii[m], norm, n_sphere_samples);
        }
        if (mode == EtaMode::UniformMax) eta.setConstant(eta.maxCoeff());
        cov.eta.push_back(std::move(eta));
    }
    return cov;
}

/// Uniform delta-net on every constraint domain.
inline Covering uniform_covering(const ConstraintSystem &system, const KernelSpec &spec, double delta, Norm norm,
                                 EtaMode mode = EtaMode::PerCenter) {
    std::vector<Net> nets;
    for (const auto &c : system.constraints) nets.push_back(uniform_box_net(c.domain, delta, norm));
    return make_covering(system, spec, std::move(nets), norm, mode);
}

/// Grid net with `per_axis` centers per axis on every constraint domain.
inline Covering grid_covering(const ConstraintSystem &system, const KernelSpec &spec, int per_axis, Norm norm,
                              EtaMode mode = EtaMode::PerCenter) {
    std::vector<Net> nets;
    for (const auto &c : system.constraints) nets.push_back(grid_net(c.domain, per_axis, norm));
    return make_covering(system, spec, std::move(nets), norm, mode);
}

/// Anchored (nested-under-doubling) grid on every constraint domain.
inline Covering anchored_grid_covering(const ConstraintSystem &system, const KernelSpec &spec, int per_axis, Norm norm,
                                       EtaMode mode = EtaMode::PerCenter) {
    std::vector<Net> nets;
    for (const auto &c : system.constraints) nets.push_back(anchored_grid_net(c.domain, per_axis, norm));
    return make_covering(system, spec, std::move(nets), norm, mode);
}

/// Sample-recycling nets on every constraint domain.
inline Covering recycled_covering(const ConstraintSystem &system, const KernelSpec &spec, const PointSet &samples,
                                  int max_added, Norm norm, EtaMode mode = EtaMode::PerCenter) {
    std::vector<Net> nets;
    for (const auto &c : system.constraints) {
        std::vector<Eigen::Index> inside;
        for (Eigen::Index n = 0; n < samples.rows(); ++n) {
            if (c.domain.contains(samples.row(n).transpose())) inside.push_back(n);
        }
        PointSet sub(static_cast<Eigen::Index>(inside.size()), samples.cols());
        for (std::size_t k = 0; k < inside.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = samples.row(inside[k]);
        nets.push_back(recycled_net(c.domain, sub, max_added, norm));
    }
    return make_covering(system, spec, std::move(nets), norm, mode);
}

}  // namespace shapekern
