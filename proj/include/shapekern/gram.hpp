#pragma once

#include <Eigen/Dense>

#include <vector>

#include "shapekern/covering.hpp"
#include "shapekern/error.hpp"
#include "shapekern/kernels.hpp"

namespace shapekern {

/// Index map of the generators: I anchors, then N samples, then the centers of
/// constraint 0, constraint 1, ...
struct GramLayout {
    int I = 0;
    int N = 0;
    std::vector<int> center_offset;  // per constraint, relative to the first center
    std::vector<int> center_count;

    [[nodiscard]] int M() const {
        int m = 0;
        for (int c : center_count) m += c;
        return m;
    }
    [[nodiscard]] int size() const { return I + N + M(); }
    [[nodiscard]] int anchor(int i) const { return i; }
    [[nodiscard]] int sample(int n) const { return I + n; }
    [[nodiscard]] int center(int i, int m) const { return I + N + center_offset[i] + m; }
};

/// One generator of the function space: w * D_x k(p, .) or an anchor expansion.
struct Generator {
    enum class Kind { Anchor, Section };
    Kind kind = Kind::Section;
    DifferentialOperator op;
    Eigen::VectorXd point;
    const AnchorFunction *anchor = nullptr;
};

struct GramBundle {
    Eigen::MatrixXd G;
    Eigen::MatrixXd G_sqrt;  // (G + eps_tol I)^{1/2}
    Eigen::MatrixXd G_half;  // G^{1/2}
    std::vector<Eigen::MatrixXd> G_D;
    GramLayout layout;
    double eps_tol = 0.0;
};

/// Symmetric square root of (S + shift I) by eigendecomposition; negative
/// eigenvalues from round-off are clamped to zero.
inline Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd &S, double shift = 0.0) {
    if (S.rows() == 0) return S;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    const Eigen::VectorXd lam = (es.eigenvalues().array() + shift).max(0.0).sqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

namespace detail {

// <a, b>_k for two generators.
inline double generator_inner(const KernelSpec &spec, const Generator &a, const Generator &b) {
    if (a.kind == Generator::Kind::Anchor && b.kind == Generator::Kind::Anchor) {
        const auto &fa = *a.anchor;
        const auto &fb = *b.anchor;
        double total = 0.0;
        for (Eigen::Index j = 0; j < fa.weights.size(); ++j) {
            for (Eigen::Index l = 0; l < fb.weights.size(); ++l) {
                total += fa.weights[j] * fb.weights[l] *
                         eval_kernel(spec, fa.centers.row(j).transpose(), fb.centers.row(l).transpose());
            }
        }
        return total;
    }
    if (a.kind == Generator::Kind::Anchor) return a.anchor->apply(spec, b.op, b.point);
    if (b.kind == Generator::Kind::Anchor) return b.anchor->apply(spec, a.op, a.point);
    return eval_derivative_kernel(spec, a.op, b.op, a.point, b.point);
}

}  // namespace detail

/// Generators in layout order.
inline std::vector<Generator> make_generators(const std::vector<AnchorFunction> &anchors, const PointSet &samples,
                                              const Covering &covering,
                                              const std::vector<DifferentialOperator> &operators, int dim) {
    if (operators.size() != covering.nets.size()) {
        throw std::invalid_argument("one operator per covered constraint is required");
    }
    std::vector<Generator> gens;
    for (const auto &a : anchors) gens.push_back({Generator::Kind::Anchor, DifferentialOperator::identity(dim), {}, &a});
    const auto identity = DifferentialOperator::identity(dim);
    for (Eigen::Index n = 0; n < samples.rows(); ++n) {
        gens.push_back({Generator::Kind::Section, identity, samples.row(n).transpose(), nullptr});
    }
    for (std::size_t i = 0; i < covering.nets.size(); ++i) {
        const auto &net = covering.nets[i];
        for (int m = 0; m < net.size(); ++m) {
            gens.push_back({Generator::Kind::Section, operators[i], net.centers.row(m).transpose(), nullptr});
        }
    }
    return gens;
}

inline Eigen::MatrixXd gram_matrix(const KernelSpec &spec, const std::vector<Generator> &gens) {
    const auto n = static_cast<Eigen::Index>(gens.size());
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = r; c < n; ++c) {
            const double v = detail::generator_inner(spec, gens[r], gens[c]);
            G(r, c) = v;
            G(c, r) = v;
        }
    }
    if (!G.allFinite()) throw NumericError("non-finite Gram entry");
    return G;
}

/// Gram matrices of the representer expansion.
///
/// G(r, c) = <g_r, g_c>_k. G_D[i](r, c) = <D_i k(p_r, .), g_c>_k = D_i g_c(p_r)
/// for the point p_r of generator r; anchor rows are zero.
inline GramBundle build_gram_bundle(const KernelSpec &spec, const std::vector<AnchorFunction> &anchors,
                                    const PointSet &samples, const Covering &covering,
                                    const std::vector<DifferentialOperator> &operators, double eps_tol = 1e-4,
                                    bool with_derivative_grams = true) {
    spec.validate();
    if (eps_tol < 0.0) throw std::invalid_argument("eps_tol must be non-negative");
    int dim = static_cast<int>(samples.cols());
    for (const auto &net : covering.nets) {
        if (net.size() > 0) dim = static_cast<int>(net.centers.cols());
    }
    if (samples.rows() > 0 && samples.cols() != dim) throw std::invalid_argument("samples and centers differ in dimension");
    for (const auto &op : operators) check_operator(spec, op, dim);

    GramBundle out;
    out.eps_tol = eps_tol;
    out.layout.I = static_cast<int>(anchors.size());
    out.layout.N = static_cast<int>(samples.rows());
    int off = 0;
    for (const auto &net : covering.nets) {
        out.layout.center_offset.push_back(off);
        out.layout.center_count.push_back(net.size());
        off += net.size();
    }

    const auto gens = make_generators(anchors, samples, covering, operators, dim);
    out.G = gram_matrix(spec, gens);
    out.G_sqrt = symmetric_sqrt(out.G, eps_tol);
    out.G_half = eps_tol == 0.0 ? out.G_sqrt : symmetric_sqrt(out.G, 0.0);

    if (with_derivative_grams) {
        const auto n = static_cast<Eigen::Index>(gens.size());
        for (const auto &op : operators) {
            Eigen::MatrixXd gd = Eigen::MatrixXd::Zero(n, n);
            for (Eigen::Index r = 0; r < n; ++r) {
                if (gens[r].kind == Generator::Kind::Anchor) continue;
                const Generator probe{Generator::Kind::Section, op, gens[r].point, nullptr};
                for (Eigen::Index c = 0; c < n; ++c) gd(r, c) = detail::generator_inner(spec, probe, gens[c]);
            }
            if (!gd.allFinite()) throw NumericError("non-finite derivative Gram entry");
            out.G_D.push_back(std::move(gd));
        }
    }
    return out;
}

}  // namespace shapekern
