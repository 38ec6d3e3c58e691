#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapekern/error.hpp"

namespace shapekern {

/// One point per row. Row-major so that `row(i).transpose()` binds to
/// `Eigen::Ref<const Eigen::VectorXd>` without a copy.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;
using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex &r) { return std::accumulate(r.begin(), r.end(), 0); }

/// D = sum_j gamma_j * partial^{r_j}, acting on functions of d variables.
class DifferentialOperator {
public:
    struct Term {
        double gamma = 1.0;
        MultiIndex index;
    };

    DifferentialOperator() = default;

    explicit DifferentialOperator(std::vector<Term> terms) : terms_(std::move(terms)) { validate(); }

    static DifferentialOperator identity(int dim) { return DifferentialOperator({{1.0, MultiIndex(dim, 0)}}); }

    static DifferentialOperator partial(MultiIndex index, double gamma = 1.0) {
        return DifferentialOperator({{gamma, std::move(index)}});
    }

    /// n-th partial derivative along `axis`.
    static DifferentialOperator axis(int dim, int axis, int n = 1, double gamma = 1.0) {
        if (axis < 0 || axis >= dim) {
            throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for dimension " +
                                        std::to_string(dim));
        }
        MultiIndex r(dim, 0);
        r[axis] = n;
        return partial(std::move(r), gamma);
    }

    [[nodiscard]] const std::vector<Term> &terms() const { return terms_; }
    [[nodiscard]] bool empty() const { return terms_.empty(); }
    [[nodiscard]] int dim() const { return terms_.empty() ? 0 : static_cast<int>(terms_.front().index.size()); }

    [[nodiscard]] int order() const {
        int o = 0;
        for (const auto &t : terms_) o = std::max(o, total_order(t.index));
        return o;
    }

    [[nodiscard]] bool is_identity() const {
        return terms_.size() == 1 && terms_[0].gamma == 1.0 && total_order(terms_[0].index) == 0;
    }

    /// Same operator with every coefficient negated (turns a ">=" into a "<=").
    [[nodiscard]] DifferentialOperator negated() const {
        auto t = terms_;
        for (auto &term : t) term.gamma = -term.gamma;
        return DifferentialOperator(std::move(t));
    }

    [[nodiscard]] DifferentialOperator operator+(const DifferentialOperator &other) const {
        auto t = terms_;
        t.insert(t.end(), other.terms_.begin(), other.terms_.end());
        return DifferentialOperator(std::move(t));
    }

    [[nodiscard]] DifferentialOperator operator-(const DifferentialOperator &other) const {
        return *this + other.negated();
    }

    bool operator==(const DifferentialOperator &other) const {
        if (terms_.size() != other.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (terms_[i].gamma != other.terms_[i].gamma || terms_[i].index != other.terms_[i].index) return false;
        }
        return true;
    }

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i) os << " + ";
            os << terms_[i].gamma << "*d^(";
            for (std::size_t j = 0; j < terms_[i].index.size(); ++j) os << (j ? "," : "") << terms_[i].index[j];
            os << ")";
        }
        return os.str();
    }

private:
    void validate() const {
        if (terms_.empty()) throw std::invalid_argument("differential operator needs at least one term");
        const auto d = terms_.front().index.size();
        if (d == 0) throw std::invalid_argument("differential operator multi-index must have length >= 1");
        for (const auto &t : terms_) {
            if (t.index.size() != d) throw std::invalid_argument("differential operator terms disagree on dimension");
            for (int r : t.index) {
                if (r < 0) throw std::invalid_argument("negative entry in multi-index");
            }
            if (!std::isfinite(t.gamma)) throw std::invalid_argument("non-finite operator coefficient");
        }
    }

    std::vector<Term> terms_;
};

enum class KernelFamily { Gaussian, Polynomial };

/// Highest per-argument derivative order with a hard-coded analytic form for the
/// Gaussian kernel.
inline constexpr int kMaxGaussianOrder = 2;

/// Symmetric positive-definite kernel together with the derivative order it is
/// allowed to serve.
///
///  * Gaussian:   k(x, y) = exp(-|x - y|^2 / (2 sigma^2))
///  * Polynomial: k(x, y) = (<x, y> + offset)^degree
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double sigma = 1.0;
    int degree = 2;
    double offset = 1.0;
    int smoothness = kMaxGaussianOrder;

    static KernelSpec gaussian(double sigma, int smoothness = kMaxGaussianOrder) {
        KernelSpec k;
        k.family = KernelFamily::Gaussian;
        k.sigma = sigma;
        k.smoothness = smoothness;
        k.validate();
        return k;
    }

    static KernelSpec polynomial(int degree, double offset, int smoothness) {
        KernelSpec k;
        k.family = KernelFamily::Polynomial;
        k.degree = degree;
        k.offset = offset;
        k.smoothness = smoothness;
        k.validate();
        return k;
    }

    [[nodiscard]] bool shift_invariant() const { return family == KernelFamily::Gaussian; }

    void validate() const {
        if (smoothness < 0) throw std::invalid_argument("smoothness order must be non-negative");
        if (family == KernelFamily::Gaussian) {
            if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("Gaussian bandwidth must be > 0");
            if (smoothness > kMaxGaussianOrder) {
                throw OrderError("Gaussian kernel derivatives are implemented up to order " +
                                 std::to_string(kMaxGaussianOrder) + ", requested " + std::to_string(smoothness));
            }
        } else {
            if (degree < 0) throw std::invalid_argument("polynomial degree must be non-negative");
            if (!(offset >= 0.0)) throw std::invalid_argument("polynomial offset must be non-negative");
            if (smoothness > degree) {
                throw OrderError("polynomial kernel of degree " + std::to_string(degree) +
                                 " cannot serve derivatives of order " + std::to_string(smoothness));
            }
        }
    }

    bool operator==(const KernelSpec &o) const {
        if (family != o.family || smoothness != o.smoothness) return false;
        return family == KernelFamily::Gaussian ? sigma == o.sigma : (degree == o.degree && offset == o.offset);
    }
};

namespace detail {

// d^n/dt^n exp(-t^2 / (2 sigma^2)) = (-1/sigma)^n He_n(t/sigma) exp(-t^2/(2 sigma^2)),
// returned without the exponential factor.
inline double gaussian_derivative_factor(int n, double t, double sigma) {
    const double u = t / sigma;
    double he_prev = 1.0;
    double he = u;
    if (n == 0) return 1.0;
    for (int k = 1; k < n; ++k) {
        const double next = u * he - k * he_prev;
        he_prev = he;
        he = next;
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * he / std::pow(sigma, n);
}

inline double falling_factorial(int a, int r) {
    double out = 1.0;
    for (int k = 0; k < r; ++k) out *= static_cast<double>(a - k);
    return out;
}

inline double factorial(int n) {
    double out = 1.0;
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

// Calls fn(alpha) for every alpha in N^d with |alpha| <= p.
template<typename Fn>
void for_each_multi_index(MultiIndex &alpha, int pos, int remaining, Fn &fn) {
    if (pos == static_cast<int>(alpha.size())) {
        fn(static_cast<const MultiIndex &>(alpha));
        return;
    }
    for (int a = 0; a <= remaining; ++a) {
        alpha[pos] = a;
        for_each_multi_index(alpha, pos + 1, remaining - a, fn);
    }
    alpha[pos] = 0;
}

template<typename Fn>
void for_each_multi_index(int d, int p, Fn &&fn) {
    MultiIndex alpha(d, 0);
    for_each_multi_index(alpha, 0, p, fn);
}

}  // namespace detail

/// Mixed partial derivative d^{rx}_x d^{ry}_y k(x, y) for monomial orders.
inline double mixed_partial(const KernelSpec &spec, const MultiIndex &rx, const MultiIndex &ry, const PointRef &x,
                            const PointRef &y) {
    const auto d = static_cast<int>(x.size());
    if (spec.family == KernelFamily::Gaussian) {
        double sq = 0.0;
        double poly = 1.0;
        for (int j = 0; j < d; ++j) {
            const double z = x[j] - y[j];
            sq += z * z;
            const int n = rx[j] + ry[j];
            if (n > 0) poly *= detail::gaussian_derivative_factor(n, z, spec.sigma);
        }
        const double sign = (total_order(ry) % 2 == 0) ? 1.0 : -1.0;
        return sign * poly * std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
    }

    // (<x,y> + c)^p = sum_{|alpha| <= p} p! / (alpha! (p - |alpha|)!) c^{p-|alpha|} prod_j (x_j y_j)^{alpha_j}
    const int p = spec.degree;
    double total = 0.0;
    const double p_fact = detail::factorial(p);
    detail::for_each_multi_index(d, p, [&](const MultiIndex &alpha) {
        double term = p_fact / detail::factorial(p - total_order(alpha)) * std::pow(spec.offset, p - total_order(alpha));
        for (int j = 0; j < d; ++j) {
            const int a = alpha[j];
            if (a < rx[j] || a < ry[j]) {
                term = 0.0;
                return;
            }
            term /= detail::factorial(a);
            term *= detail::falling_factorial(a, rx[j]) * std::pow(x[j], a - rx[j]);
            term *= detail::falling_factorial(a, ry[j]) * std::pow(y[j], a - ry[j]);
        }
        total += term;
    });
    return total;
}

inline void check_dims(const PointRef &x, const PointRef &y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    }
    if (x.size() == 0) throw std::invalid_argument("points must have dimension >= 1");
}

/// k(x, y).
inline double eval_kernel(const KernelSpec &spec, const PointRef &x, const PointRef &y) {
    check_dims(x, y);
    if (spec.family == KernelFamily::Gaussian) {
        return std::exp(-(x - y).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    }
    return std::pow(x.dot(y) + spec.offset, spec.degree);
}

inline void check_operator(const KernelSpec &spec, const DifferentialOperator &op, Eigen::Index dim) {
    if (op.empty()) throw std::invalid_argument("empty differential operator");
    if (op.dim() != dim) {
        throw std::invalid_argument("operator acts on dimension " + std::to_string(op.dim()) + " but points have " +
                                    std::to_string(dim));
    }
    if (op.order() > spec.smoothness) {
        throw OrderError("operator of order " + std::to_string(op.order()) + " exceeds kernel smoothness " +
                         std::to_string(spec.smoothness));
    }
}

/// (Dx acting on the first argument)(Dy acting on the second argument) k at (x, y).
/// Equals <Dx k(x, .), Dy k(y, .)>_k by the derivative-reproducing property.
inline double eval_derivative_kernel(const KernelSpec &spec, const DifferentialOperator &dx,
                                     const DifferentialOperator &dy, const PointRef &x, const PointRef &y) {
    check_dims(x, y);
    check_operator(spec, dx, x.size());
    check_operator(spec, dy, y.size());
    double total = 0.0;
    for (const auto &a : dx.terms()) {
        for (const auto &b : dy.terms()) {
            total += a.gamma * b.gamma * mixed_partial(spec, a.index, b.index, x, y);
        }
    }
    if (!std::isfinite(total)) throw NumericError("non-finite derivative kernel value");
    return total;
}

/// Finite kernel expansion sum_j weight_j k(center_j, .); the empty expansion is
/// the zero function.
struct AnchorFunction {
    Eigen::VectorXd weights;
    PointSet centers;

    [[nodiscard]] bool is_zero() const { return weights.size() == 0 || weights.isZero(0.0); }

    static AnchorFunction zero() { return {}; }

    /// D f0 evaluated at x.
    [[nodiscard]] double apply(const KernelSpec &spec, const DifferentialOperator &op, const PointRef &x) const {
        double total = 0.0;
        const auto identity = DifferentialOperator::identity(static_cast<int>(x.size()));
        for (Eigen::Index j = 0; j < weights.size(); ++j) {
            total += weights[j] * eval_derivative_kernel(spec, identity, op, centers.row(j).transpose(), x);
        }
        return total;
    }
};

}  // namespace shapekern
