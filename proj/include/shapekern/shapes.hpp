#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "shapekern/kernels.hpp"

namespace shapekern {

/// Axis-aligned box prod_j [lower_j, upper_j].
struct CompactBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    CompactBox() = default;
    CompactBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    static CompactBox interval(double lo, double hi) {
        return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
    }

    static CompactBox cube(int dim, double lo, double hi) {
        return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
    }

    /// Smallest box containing every row of `points`.
    static CompactBox bounding(const PointSet &points) {
        if (points.rows() == 0) throw std::invalid_argument("bounding box of an empty point set");
        return {points.colwise().minCoeff().transpose(), points.colwise().maxCoeff().transpose()};
    }

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
    [[nodiscard]] Eigen::VectorXd midpoint() const { return 0.5 * (lower + upper); }
    [[nodiscard]] Eigen::VectorXd widths() const { return upper - lower; }

    [[nodiscard]] double volume() const { return widths().prod(); }

    [[nodiscard]] bool contains(const PointRef &x, double tol = 0.0) const {
        for (int j = 0; j < dim(); ++j) {
            if (x[j] < lower[j] - tol || x[j] > upper[j] + tol) return false;
        }
        return true;
    }

    void validate() const {
        if (lower.size() == 0 || lower.size() != upper.size()) throw std::invalid_argument("box bounds mismatch");
        for (int j = 0; j < dim(); ++j) {
            if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) throw std::invalid_argument("non-finite box");
            if (lower[j] > upper[j]) throw std::invalid_argument("box lower bound exceeds upper bound");
        }
    }

    bool operator==(const CompactBox &o) const { return lower == o.lower && upper == o.upper; }
};

/// One affine derivative constraint of the form
///   (b0 - U_row . b) <= D (W_row . f - f0)(x)   for all x in domain.
struct ShapeConstraint {
    DifferentialOperator op;
    CompactBox domain;
    double b0 = 0.0;
    AnchorFunction f0;
    Eigen::VectorXd U_row;
    Eigen::VectorXd W_row;
    std::string label;

    /// Same constraint with the inequality direction flipped on the derivative
    /// side: D becomes -D and b0 becomes -b0 with U negated, so the relation
    /// "D(...) <= rhs" is expressed in the canonical ">=" form.
    [[nodiscard]] ShapeConstraint flipped() const {
        ShapeConstraint c = *this;
        c.op = op.negated();
        c.b0 = -b0;
        c.U_row = -U_row;
        c.label = label.empty() ? label : label + " (flipped)";
        return c;
    }

    void validate(int Q, int P) const {
        domain.validate();
        if (op.empty()) throw std::invalid_argument("shape constraint without operator");
        if (op.dim() != domain.dim()) throw std::invalid_argument("operator and domain dimensions differ");
        if (U_row.size() != P) throw std::invalid_argument("U row length must equal the number of biases");
        if (W_row.size() != Q) throw std::invalid_argument("W row length must equal the number of functions");
        if (W_row.isZero(0.0) && f0.is_zero()) {
            throw std::invalid_argument(
                "constraint involves neither a function nor an anchor; express it through the bias set");
        }
        if (!f0.is_zero() && f0.centers.cols() != domain.dim()) {
            throw std::invalid_argument("anchor centers have the wrong dimension");
        }
    }
};

/// Closed convex set of admissible bias vectors.
struct BiasSet {
    enum class Kind { Free, Zero, Box };
    Kind kind = Kind::Free;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static BiasSet free() { return {}; }
    static BiasSet zero() { return {Kind::Zero, {}, {}}; }
    static BiasSet box(Eigen::VectorXd lo, Eigen::VectorXd hi) { return {Kind::Box, std::move(lo), std::move(hi)}; }
};

struct ConstraintSystem {
    std::vector<ShapeConstraint> constraints;
    int Q = 1;
    int P = 1;
    BiasSet bias;

    [[nodiscard]] int size() const { return static_cast<int>(constraints.size()); }
    [[nodiscard]] bool empty() const { return constraints.empty(); }

    [[nodiscard]] int max_order() const {
        int o = 0;
        for (const auto &c : constraints) o = std::max(o, c.op.order());
        return o;
    }

    [[nodiscard]] int dim() const { return constraints.empty() ? 0 : constraints.front().domain.dim(); }

    [[nodiscard]] Eigen::MatrixXd U() const {
        Eigen::MatrixXd u(size(), P);
        for (int i = 0; i < size(); ++i) u.row(i) = constraints[i].U_row.transpose();
        return u;
    }

    [[nodiscard]] Eigen::MatrixXd W() const {
        Eigen::MatrixXd w(size(), Q);
        for (int i = 0; i < size(); ++i) w.row(i) = constraints[i].W_row.transpose();
        return w;
    }

    void validate() const {
        if (Q < 1) throw std::invalid_argument("need at least one function");
        if (P < 0) throw std::invalid_argument("negative bias count");
        for (const auto &c : constraints) {
            c.validate(Q, P);
            if (c.domain.dim() != dim()) throw std::invalid_argument("constraint domains disagree on dimension");
        }
        if (bias.kind == BiasSet::Kind::Box) {
            if (bias.lower.size() != P || bias.upper.size() != P) {
                throw std::invalid_argument("bias box must have P coordinates");
            }
            for (int p = 0; p < P; ++p) {
                if (bias.lower[p] > bias.upper[p]) throw std::invalid_argument("empty bias box");
            }
        }
    }
};

/// D f >= 0 on `domain` with D = coefficient * d^n / dx_axis^n applied to function q.
inline ShapeConstraint axis_constraint(int axis, int n, const CompactBox &domain, int Q, int q, int P,
                                       double gamma = 1.0) {
    domain.validate();
    if (axis < 0 || axis >= domain.dim()) {
        throw std::invalid_argument("dimension index " + std::to_string(axis) + " out of range for d=" +
                                    std::to_string(domain.dim()));
    }
    if (q < 0 || q >= Q) throw std::invalid_argument("function index out of range");
    ShapeConstraint c;
    c.op = DifferentialOperator::axis(domain.dim(), axis, n, gamma);
    c.domain = domain;
    c.U_row = Eigen::VectorXd::Zero(P);
    c.W_row = Eigen::VectorXd::Unit(Q, q);
    return c;
}

/// d f_q / d x_axis >= 0 on the domain.
inline ShapeConstraint monotone_increasing(int dim_index, const CompactBox &domain, int Q = 1, int q = 0, int P = 1) {
    auto c = axis_constraint(dim_index, 1, domain, Q, q, P);
    c.label = "monotone increasing along x" + std::to_string(dim_index);
    return c;
}

inline ShapeConstraint monotone_decreasing(int dim_index, const CompactBox &domain, int Q = 1, int q = 0,
                                           int P = 1) {
    auto c = axis_constraint(dim_index, 1, domain, Q, q, P, -1.0);
    c.label = "monotone decreasing along x" + std::to_string(dim_index);
    return c;
}

inline ShapeConstraint nonnegative(const CompactBox &domain, int Q = 1, int q = 0, int P = 1) {
    auto c = axis_constraint(0, 0, domain, Q, q, P);
    c.label = "non-negative";
    return c;
}

/// d^2 f_q / d x_axis^2 >= 0 (coordinate-wise convexity; concave when gamma = -1).
inline ShapeConstraint convex_along(int dim_index, const CompactBox &domain, int Q = 1, int q = 0, int P = 1,
                                   double gamma = 1.0) {
    auto c = axis_constraint(dim_index, 2, domain, Q, q, P, gamma);
    c.label = std::string(gamma > 0 ? "convex" : "concave") + " along x" + std::to_string(dim_index);
    return c;
}

/// f_{q+1} + b_{q+1} >= f_q + b_q on `domain` for q = 1..Q-1: U = W is the
/// (Q-1) x Q first-difference matrix, identity operators, free biases.
inline ConstraintSystem non_crossing_system(int Q, const CompactBox &domain) {
    if (Q < 2) throw std::invalid_argument("non-crossing needs at least two quantile functions");
    domain.validate();
    ConstraintSystem sys;
    sys.Q = Q;
    sys.P = Q;
    sys.bias = BiasSet::free();
    for (int i = 0; i < Q - 1; ++i) {
        ShapeConstraint c;
        c.op = DifferentialOperator::identity(domain.dim());
        c.domain = domain;
        c.U_row = Eigen::VectorXd::Zero(Q);
        c.U_row[i] = -1.0;
        c.U_row[i + 1] = 1.0;
        c.W_row = c.U_row;
        c.label = "non-crossing " + std::to_string(i) + "<" + std::to_string(i + 1);
        sys.constraints.push_back(std::move(c));
    }
    return sys;
}

enum class CatalogShape {
    NMonotone,
    AlternatingMonotone,
    WeakMajorizationMonotone,
    ProductOrderMonotone,
    Supermodular,
};

struct CatalogParams {
    int n = 1;       // order for NMonotone / AlternatingMonotone
    int Q = 1;
    int q = 0;
    int P = 1;
};

/// Derivative order the catalog entry needs from the kernel.
inline int catalog_required_order(CatalogShape shape, int n) {
    switch (shape) {
        case CatalogShape::NMonotone:
        case CatalogShape::AlternatingMonotone: return n;
        case CatalogShape::WeakMajorizationMonotone:
        case CatalogShape::ProductOrderMonotone: return 1;
        case CatalogShape::Supermodular: return 2;
    }
    return 0;
}

/// Ready-made derivative reformulations of common shape constraints.
///
///  * NMonotone(n):           f^(n) >= 0 (d = 1)
///  * AlternatingMonotone(n): n = 1: f >= 0 and f non-increasing;
///                            n >= 2: (-1)^j f^(j) non-negative, non-increasing
///                            and convex for j = 0..n-2 (d = 1)
///  * WeakMajorization:       d_1 f >= d_2 f >= ... >= d_d f >= 0
///  * ProductOrder:           d_j f >= 0 for every j
///  * Supermodular:           d_i d_j f >= 0 for every i < j
inline std::vector<ShapeConstraint> catalog(CatalogShape shape, const CompactBox &domain, const KernelSpec &kernel,
                                            const CatalogParams &params = {}) {
    domain.validate();
    const int d = domain.dim();
    const int n = params.n;
    if ((shape == CatalogShape::NMonotone || shape == CatalogShape::AlternatingMonotone) && n < 1) {
        throw std::invalid_argument("monotonicity order must be >= 1");
    }
    const int required = catalog_required_order(shape, n);
    if (required > kernel.smoothness) {
        throw OrderError("shape requires derivatives of order " + std::to_string(required) +
                         " but the kernel supports " + std::to_string(kernel.smoothness));
    }
    const auto make = [&](DifferentialOperator op, std::string label) {
        ShapeConstraint c;
        c.op = std::move(op);
        c.domain = domain;
        c.U_row = Eigen::VectorXd::Zero(params.P);
        c.W_row = Eigen::VectorXd::Unit(params.Q, params.q);
        c.label = std::move(label);
        return c;
    };

    std::vector<ShapeConstraint> out;
    switch (shape) {
        case CatalogShape::NMonotone:
            if (d != 1) throw std::invalid_argument("n-monotonicity is defined for d = 1");
            out.push_back(make(DifferentialOperator::axis(1, 0, n), std::to_string(n) + "-monotone"));
            break;
        case CatalogShape::AlternatingMonotone:
            if (d != 1) throw std::invalid_argument("alternating monotonicity is defined for d = 1");
            if (n == 1) {
                out.push_back(make(DifferentialOperator::axis(1, 0, 0), "non-negative"));
                out.push_back(make(DifferentialOperator::axis(1, 0, 1, -1.0), "non-increasing"));
                break;
            }
            for (int j = 0; j <= n - 2; ++j) {
                const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                const std::string g = "(-1)^" + std::to_string(j) + " f^(" + std::to_string(j) + ")";
                out.push_back(make(DifferentialOperator::axis(1, 0, j, sign), g + " non-negative"));
                out.push_back(make(DifferentialOperator::axis(1, 0, j + 1, -sign), g + " non-increasing"));
                out.push_back(make(DifferentialOperator::axis(1, 0, j + 2, sign), g + " convex"));
            }
            break;
        case CatalogShape::WeakMajorizationMonotone:
            for (int j = 0; j + 1 < d; ++j) {
                out.push_back(make(DifferentialOperator::axis(d, j) - DifferentialOperator::axis(d, j + 1),
                                   "d" + std::to_string(j) + " f >= d" + std::to_string(j + 1) + " f"));
            }
            out.push_back(make(DifferentialOperator::axis(d, d - 1), "d" + std::to_string(d - 1) + " f >= 0"));
            break;
        case CatalogShape::ProductOrderMonotone:
            for (int j = 0; j < d; ++j) {
                out.push_back(make(DifferentialOperator::axis(d, j), "d" + std::to_string(j) + " f >= 0"));
            }
            break;
        case CatalogShape::Supermodular:
            if (d < 2) throw std::invalid_argument("supermodularity needs d >= 2");
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j) {
                    MultiIndex r(d, 0);
                    r[i] = 1;
                    r[j] = 1;
                    out.push_back(make(DifferentialOperator::partial(r),
                                       "d" + std::to_string(i) + "d" + std::to_string(j) + " f >= 0"));
                }
            }
            break;
    }
    return out;
}

}  // namespace shapekern
