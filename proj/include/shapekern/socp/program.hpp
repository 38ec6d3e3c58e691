#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapekern/socp/cones.hpp"

namespace shapekern::socp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<double>;

/// min c'x  s.t.  A x + s = b,  s in K = K_1 x ... x K_r.
///
/// The dual is  max -b'y  s.t.  A'y + c = 0,  y in K*.
struct ConicProgram {
    Eigen::VectorXd c;
    SparseMatrix A;
    Eigen::VectorXd b;
    std::vector<Cone> cones;

    [[nodiscard]] int num_vars() const { return static_cast<int>(c.size()); }
    [[nodiscard]] int num_rows() const { return static_cast<int>(b.size()); }

    void validate() const {
        if (A.rows() != b.size() || A.cols() != c.size()) throw std::invalid_argument("conic program shape mismatch");
        if (total_dim(cones) != b.size()) throw std::invalid_argument("cone dimensions must sum to the row count");
        for (const auto &k : cones) {
            if (k.dim < 1) throw std::invalid_argument("cone blocks need dimension >= 1");
        }
        if (!c.allFinite() || !b.allFinite()) throw std::invalid_argument("non-finite program data");
        for (int j = 0; j < A.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
                if (!std::isfinite(it.value())) throw std::invalid_argument("non-finite program data");
            }
        }
    }
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIter };

inline const char *to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::MaxIter: return "max_iter";
    }
    return "unknown";
}

enum class Method { Auto, OperatorSplitting, InteriorPoint };

struct SolverOptions {
    double tol = 1e-7;
    int max_iter = 100000;
    Method method = Method::Auto;
    // Auto uses the interior-point backend up to this many variables.
    int interior_point_max_vars = 3000;
    bool verbose = false;
};

struct SolveReport {
    Status status = Status::MaxIter;
    Eigen::VectorXd primal;
    Eigen::VectorXd dual;
    Eigen::VectorXd slack;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    double primal_residual = std::numeric_limits<double>::infinity();
    double dual_residual = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::string method;
    std::string message;
};

/// Normalised residuals of (x, s, y) for the program, written into `rep`.
inline void fill_residuals(const ConicProgram &p, SolveReport &rep) {
    const Eigen::VectorXd &x = rep.primal;
    const Eigen::VectorXd &y = rep.dual;
    const Eigen::VectorXd &s = rep.slack;
    const double bn = p.b.size() ? p.b.lpNorm<Eigen::Infinity>() : 0.0;
    const double cn = p.c.size() ? p.c.lpNorm<Eigen::Infinity>() : 0.0;
    const Eigen::VectorXd rp = p.A * x + s - p.b;
    const Eigen::VectorXd rd = p.A.transpose() * y + p.c;
    rep.primal_residual = (rp.size() ? rp.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + bn);
    rep.dual_residual = (rd.size() ? rd.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + cn);
    rep.objective = p.c.dot(x);
    rep.dual_objective = -p.b.dot(y);
    rep.gap = std::abs(rep.objective - rep.dual_objective) /
              (1.0 + std::abs(rep.objective) + std::abs(rep.dual_objective));
}

/// Plain-text sparse triplet dump:
///   n m nnz
///   c_0 ... c_{n-1}
///   b_0 ... b_{m-1}
///   ncones  then one "kind dim" line per cone (kind in z, l, q)
///   nnz lines "row col value"
inline void write_triplets(std::ostream &os, const ConicProgram &p) {
    os << std::setprecision(17);
    os << p.num_vars() << ' ' << p.num_rows() << ' ' << p.A.nonZeros() << '\n';
    for (int j = 0; j < p.num_vars(); ++j) os << (j ? " " : "") << p.c[j];
    os << '\n';
    for (int i = 0; i < p.num_rows(); ++i) os << (i ? " " : "") << p.b[i];
    os << '\n' << p.cones.size() << '\n';
    for (const auto &k : p.cones) {
        const char tag = k.kind == ConeKind::Zero ? 'z' : k.kind == ConeKind::NonNeg ? 'l' : 'q';
        os << tag << ' ' << k.dim << '\n';
    }
    for (int j = 0; j < p.A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
}

inline ConicProgram read_triplets(std::istream &is) {
    long n = 0, m = 0, nnz = 0;
    if (!(is >> n >> m >> nnz) || n < 0 || m < 0 || nnz < 0) throw std::invalid_argument("bad triplet header");
    ConicProgram p;
    p.c.resize(n);
    p.b.resize(m);
    for (long j = 0; j < n; ++j) {
        if (!(is >> p.c[j])) throw std::invalid_argument("truncated objective");
    }
    for (long i = 0; i < m; ++i) {
        if (!(is >> p.b[i])) throw std::invalid_argument("truncated right-hand side");
    }
    long ncones = 0;
    if (!(is >> ncones) || ncones < 0) throw std::invalid_argument("bad cone count");
    for (long k = 0; k < ncones; ++k) {
        char tag = 0;
        int dim = 0;
        if (!(is >> tag >> dim)) throw std::invalid_argument("truncated cone list");
        if (tag == 'z') p.cones.push_back(Cone::zero(dim));
        else if (tag == 'l') p.cones.push_back(Cone::nonneg(dim));
        else if (tag == 'q') p.cones.push_back(Cone::soc(dim));
        else throw std::invalid_argument(std::string("unknown cone tag ") + tag);
    }
    std::vector<Triplet> trip;
    for (long k = 0; k < nnz; ++k) {
        long r = 0, c = 0;
        double v = 0.0;
        if (!(is >> r >> c >> v)) throw std::invalid_argument("truncated triplets");
        if (r < 0 || r >= m || c < 0 || c >= n) throw std::invalid_argument("triplet index out of range");
        trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
    p.A.resize(m, n);
    p.A.setFromTriplets(trip.begin(), trip.end());
    p.validate();
    return p;
}

}  // namespace shapekern::socp
