#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace shapekern::socp {

enum class ConeKind { Zero, NonNeg, SOC };

struct Cone {
    ConeKind kind;
    int dim;

    static Cone zero(int d) { return {ConeKind::Zero, d}; }
    static Cone nonneg(int d) { return {ConeKind::NonNeg, d}; }
    static Cone soc(int d) { return {ConeKind::SOC, d}; }

    bool operator==(const Cone &o) const { return kind == o.kind && dim == o.dim; }
};

inline int total_dim(const std::vector<Cone> &cones) {
    int m = 0;
    for (const auto &c : cones) m += c.dim;
    return m;
}

/// Projection onto {(t, x) : |x|_2 <= t}; the first coordinate is t.
inline Eigen::VectorXd project_soc(const Eigen::Ref<const Eigen::VectorXd> &v) {
    if (v.size() < 1) throw std::invalid_argument("second-order cone needs dimension >= 1");
    const double t = v[0];
    const double nx = v.tail(v.size() - 1).norm();
    if (nx <= t) return v;
    if (nx <= -t) return Eigen::VectorXd::Zero(v.size());
    const double a = 0.5 * (t + nx);
    Eigen::VectorXd out(v.size());
    out[0] = a;
    out.tail(v.size() - 1) = (a / nx) * v.tail(v.size() - 1);
    return out;
}

/// Projection onto the product cone K.
inline Eigen::VectorXd project_cone(const std::vector<Cone> &cones, const Eigen::VectorXd &v) {
    Eigen::VectorXd out(v.size());
    int r = 0;
    for (const auto &c : cones) {
        switch (c.kind) {
            case ConeKind::Zero: out.segment(r, c.dim).setZero(); break;
            case ConeKind::NonNeg: out.segment(r, c.dim) = v.segment(r, c.dim).cwiseMax(0.0); break;
            case ConeKind::SOC: out.segment(r, c.dim) = project_soc(v.segment(r, c.dim)); break;
        }
        r += c.dim;
    }
    return out;
}

/// Projection onto the dual cone K* (the whole space on Zero blocks).
inline Eigen::VectorXd project_dual_cone(const std::vector<Cone> &cones, const Eigen::VectorXd &v) {
    Eigen::VectorXd out(v.size());
    int r = 0;
    for (const auto &c : cones) {
        switch (c.kind) {
            case ConeKind::Zero: out.segment(r, c.dim) = v.segment(r, c.dim); break;
            case ConeKind::NonNeg: out.segment(r, c.dim) = v.segment(r, c.dim).cwiseMax(0.0); break;
            case ConeKind::SOC: out.segment(r, c.dim) = project_soc(v.segment(r, c.dim)); break;
        }
        r += c.dim;
    }
    return out;
}

}  // namespace shapekern::socp
