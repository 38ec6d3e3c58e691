#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapekern/covering.hpp"
#include "shapekern/gram.hpp"
#include "shapekern/kernels.hpp"
#include "shapekern/shapes.hpp"
#include "shapekern/socp.hpp"

namespace shapekern {

enum class Loss { SquaredError, Pinball };
enum class Regularization { Ridge, NormBall };

/// Loss and regularizer of the learning problem.
///
/// Ridge adds lambda_f sum_q |f_q|^2 + lambda_b |b|^2 to the loss; NormBall
/// instead requires sqrt(sum_q |f_q|^2) <= lambda_f and |b| <= lambda_b.
struct ObjectiveSpec {
    Loss loss = Loss::SquaredError;
    std::vector<double> levels;  // pinball levels, one per function
    Regularization regularization = Regularization::Ridge;
    double lambda_f = 1e-3;
    double lambda_b = 0.0;
    // f_q + b_q enters the loss (requires P == Q and a non-zero bias set).
    bool intercept = false;

    static ObjectiveSpec ridge(double lambda_f) {
        ObjectiveSpec o;
        o.lambda_f = lambda_f;
        return o;
    }

    static ObjectiveSpec pinball(std::vector<double> levels, Regularization reg, double lambda_f, double lambda_b) {
        ObjectiveSpec o;
        o.loss = Loss::Pinball;
        o.levels = std::move(levels);
        o.regularization = reg;
        o.lambda_f = lambda_f;
        o.lambda_b = lambda_b;
        o.intercept = true;
        return o;
    }

    [[nodiscard]] int num_functions() const { return loss == Loss::Pinball ? static_cast<int>(levels.size()) : 1; }

    void validate() const {
        if (loss == Loss::Pinball) {
            if (levels.empty()) throw std::invalid_argument("pinball loss needs at least one level");
            for (std::size_t q = 0; q < levels.size(); ++q) {
                if (!(levels[q] > 0.0 && levels[q] < 1.0)) throw std::invalid_argument("levels must lie in (0, 1)");
                if (q > 0 && !(levels[q] > levels[q - 1])) throw std::invalid_argument("levels must be strictly increasing");
            }
        }
        if (!(lambda_f > 0.0) || !std::isfinite(lambda_f)) throw std::invalid_argument("lambda_f must be positive");
        if (regularization == Regularization::Ridge) {
            if (!(lambda_b >= 0.0) || !std::isfinite(lambda_b)) throw std::invalid_argument("lambda_b must be >= 0");
        } else if (!(lambda_b > 0.0) || !std::isfinite(lambda_b)) {
            throw std::invalid_argument("norm-ball radius on b must be positive");
        }
    }
};

enum class Mode { Tightened, Discretized };

/// Coordinates of the conic program.
///
/// Representer: coefficients on the generators directly, norms through G^{1/2}.
/// Orthonormal: coordinates in an orthonormal basis of the generator span
/// (eigenvectors of G with eigenvalue above rank_tol * max), so that RKHS norms
/// are plain Euclidean norms. Both describe the same functions.
enum class Parametrization { Orthonormal, Representer };

struct FitOptions {
    socp::SolverOptions solver = [] {
        socp::SolverOptions o;
        o.tol = 1e-9;
        return o;
    }();
    Parametrization parametrization = Parametrization::Orthonormal;
    double eps_tol = 1e-4;    // G^{1/2} -> (G + eps I)^{1/2} in Representer constraints
    double rank_tol = 1e-10;  // relative eigenvalue cutoff of the Orthonormal basis
};

struct Dataset {
    PointSet X;
    Eigen::VectorXd y;

    [[nodiscard]] int size() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(X.cols()); }

    void validate() const {
        if (X.rows() == 0) throw std::invalid_argument("empty data set");
        if (y.size() != X.rows()) throw std::invalid_argument("X and y disagree on the number of samples");
        if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("data contains non-finite values");
    }
};

enum class ConeRole { Loss, Regularization, Constraint, Tightening, BiasBox };

/// Where each block lives in the conic program.
struct ProgramLayout {
    int Q = 0;
    int p = 0;  // coordinates per function
    int bias = -1;
    int num_bias = 0;
    std::vector<int> t;  // per constraint, -1 without a tightening cone
    int epigraph = -1;   // squared loss norm epigraph
    int slack = -1;      // first pinball slack u_{n,q}, index slack + q N + n
    int reg_f = -1;      // rotated-cone epigraphs of the ridge terms
    int reg_b = -1;
    int num_vars = 0;
    std::vector<int> constraint_row;  // first NonNeg row of each constraint
    std::vector<ConeRole> roles;      // parallel to the cone list

    [[nodiscard]] int theta(int q) const { return q * p; }
};

struct AssembledProgram {
    socp::ConicProgram conic;
    ProgramLayout layout;
    GramBundle gram;
    Mode mode = Mode::Tightened;
    // Generator coefficients c_q = coef_map * theta_q.
    Eigen::MatrixXd coef_map;
    std::vector<AnchorFunction> anchors;
    std::vector<int> anchor_of;  // per constraint, index into anchors or -1
};

/// Solved model: f_q = sum_r coef(r, q) g_r over the generators of `layout`.
struct FittedModel {
    KernelSpec kernel;
    ConstraintSystem system;
    Covering covering;
    ObjectiveSpec objective;
    Mode mode = Mode::Tightened;
    std::vector<AnchorFunction> anchors;
    PointSet samples;
    GramLayout layout;
    Eigen::MatrixXd coef;
    Eigen::VectorXd bias;
    Eigen::VectorXd norms;  // |f_q|_k
    double value = 0.0;            // objective in the problem's own units
    double conic_objective = 0.0;  // c'x of the solved program
    double loss = 0.0;             // data-fit term alone
    socp::SolveReport report;

    [[nodiscard]] int num_functions() const { return static_cast<int>(coef.cols()); }
    [[nodiscard]] int dim() const { return static_cast<int>(samples.cols()); }
    [[nodiscard]] bool adds_bias() const { return objective.intercept && bias.size() == num_functions(); }
};

/// Non-optimal solver outcome; carries the report for diagnostics.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string &what, socp::SolveReport rep) : std::runtime_error(what), report(std::move(rep)) {}
    socp::SolveReport report;
};

namespace detail {

inline std::vector<DifferentialOperator> constraint_operators(const ConstraintSystem &system) {
    std::vector<DifferentialOperator> ops;
    for (const auto &c : system.constraints) ops.push_back(c.op);
    return ops;
}

// Generators of a fitted model; anchor pointers refer into model.anchors.
inline std::vector<Generator> model_generators(const FittedModel &m) {
    return make_generators(m.anchors, m.samples, m.covering, constraint_operators(m.system), m.dim());
}

class TripletBuilder {
public:
    void add(int row, int col, double v) {
        if (v != 0.0) trips_.emplace_back(row, col, v);
    }
    void add_row(int row, int col0, const Eigen::VectorXd &v, double scale = 1.0) {
        for (Eigen::Index k = 0; k < v.size(); ++k) add(row, col0 + static_cast<int>(k), scale * v[k]);
    }
    [[nodiscard]] socp::SparseMatrix build(int rows, int cols) const {
        socp::SparseMatrix A(rows, cols);
        A.setFromTriplets(trips_.begin(), trips_.end());
        return A;
    }

private:
    std::vector<socp::Triplet> trips_;
};

}  // namespace detail

inline void check_fit_inputs(const Dataset &data, const ObjectiveSpec &objective, const ConstraintSystem &system,
                             const Covering &covering, const KernelSpec &spec) {
    data.validate();
    objective.validate();
    system.validate();
    spec.validate();
    if (objective.num_functions() != system.Q) {
        throw std::invalid_argument("objective has " + std::to_string(objective.num_functions()) +
                                    " functions, constraint system " + std::to_string(system.Q));
    }
    if (objective.loss == Loss::SquaredError && system.Q != 1) {
        throw std::invalid_argument("squared loss fits a single function");
    }
    if (objective.intercept && (system.P != system.Q || system.bias.kind == BiasSet::Kind::Zero)) {
        throw std::invalid_argument("intercepts need P == Q and a non-zero bias set");
    }
    if (!system.empty() && system.dim() != data.dim()) throw std::invalid_argument("data and constraint domains differ in dimension");
    if (covering.num_constraints() != system.size() || covering.eta.size() != covering.nets.size()) {
        throw std::invalid_argument("covering does not match the constraint system");
    }
    for (int i = 0; i < system.size(); ++i) {
        const auto &net = covering.nets[i];
        if (net.size() == 0) throw std::invalid_argument("constraint " + std::to_string(i) + " has no centers");
        if (net.centers.cols() != data.dim()) throw std::invalid_argument("net dimension mismatch");
        if (covering.eta[i].size() != net.size()) throw std::invalid_argument("one buffer per center is required");
        if (!(covering.eta[i].array() >= 0.0).all()) throw std::invalid_argument("buffers must be non-negative");
    }
    if (spec.smoothness < system.max_order()) {
        throw OrderError("kernel smoothness " + std::to_string(spec.smoothness) + " below constraint order " +
                         std::to_string(system.max_order()));
    }
}

/// Finite-dimensional conic program of the tightened (or discretized) problem.
inline AssembledProgram assemble(const Dataset &data, const ObjectiveSpec &objective, const ConstraintSystem &system,
                                 const Covering &covering, const KernelSpec &spec, Mode mode,
                                 const FitOptions &opts = {}) {
    check_fit_inputs(data, objective, system, covering, spec);
    AssembledProgram out;
    out.mode = mode;
    const int Q = system.Q;
    const int N = data.size();
    const int I = system.size();

    for (const auto &c : system.constraints) {
        if (c.f0.is_zero()) {
            out.anchor_of.push_back(-1);
        } else {
            out.anchor_of.push_back(static_cast<int>(out.anchors.size()));
            out.anchors.push_back(c.f0);
        }
    }

    // Gram matrix and its square roots from one eigendecomposition.
    auto &gram = out.gram;
    gram.eps_tol = opts.eps_tol;
    gram.layout.I = static_cast<int>(out.anchors.size());
    gram.layout.N = N;
    for (int i = 0; i < I; ++i) {
        gram.layout.center_offset.push_back(covering.offset(i));
        gram.layout.center_count.push_back(covering.nets[i].size());
    }
    const auto ops = detail::constraint_operators(system);
    for (const auto &op : ops) check_operator(spec, op, data.dim());
    const auto gens = make_generators(out.anchors, data.X, covering, ops, data.dim());
    gram.G = gram_matrix(spec, gens);
    const int Nt = static_cast<int>(gram.G.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.G);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of the Gram matrix failed");
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd &V = es.eigenvectors();
    gram.G_half = V * lam.cwiseSqrt().asDiagonal() * V.transpose();
    gram.G_sqrt = V * (lam.array() + opts.eps_tol).sqrt().matrix().asDiagonal() * V.transpose();

    // E: generator evaluations <f, g_r> = E.row(r) theta; R: objective norm
    // factor; S: constraint norm factor; anchor coordinates per anchor.
    Eigen::MatrixXd E, R, S;
    std::vector<Eigen::VectorXd> anchor_coord;
    if (opts.parametrization == Parametrization::Representer) {
        E = gram.G;
        R = gram.G_half;
        S = gram.G_sqrt;
        out.coef_map = Eigen::MatrixXd::Identity(Nt, Nt);
        for (std::size_t a = 0; a < out.anchors.size(); ++a) {
            anchor_coord.push_back(Eigen::VectorXd::Unit(Nt, static_cast<Eigen::Index>(a)));
        }
    } else {
        const double cut = opts.rank_tol * std::max(lam.size() ? lam.maxCoeff() : 0.0, 0.0);
        std::vector<int> keep;
        for (int k = 0; k < Nt; ++k) {
            if (lam[k] > cut) keep.push_back(k);
        }
        const int r = static_cast<int>(keep.size());
        E.resize(Nt, r);
        out.coef_map.resize(Nt, r);
        for (int j = 0; j < r; ++j) {
            const double l = lam[keep[j]];
            E.col(j) = V.col(keep[j]) * std::sqrt(l);
            out.coef_map.col(j) = V.col(keep[j]) / std::sqrt(l);
        }
        R = Eigen::MatrixXd::Identity(r, r);
        S = R;
        for (std::size_t a = 0; a < out.anchors.size(); ++a) {
            anchor_coord.push_back(E.row(static_cast<Eigen::Index>(a)).transpose());
        }
    }
    const int p = static_cast<int>(E.cols());

    // Variables.
    auto &L = out.layout;
    L.Q = Q;
    L.p = p;
    int nv = Q * p;
    if (system.bias.kind != BiasSet::Kind::Zero && system.P > 0) {
        L.bias = nv;
        L.num_bias = system.P;
        nv += system.P;
    }
    L.t.assign(I, -1);
    for (int i = 0; i < I; ++i) {
        if (mode == Mode::Tightened && covering.eta_max(i) > 0.0) L.t[i] = nv++;
    }
    const bool ridge = objective.regularization == Regularization::Ridge;
    if (objective.loss == Loss::SquaredError) {
        L.epigraph = nv++;
    } else {
        L.slack = nv;
        nv += N * Q;
        if (ridge) {
            L.reg_f = nv++;
            if (L.num_bias > 0 && objective.lambda_b > 0.0) L.reg_b = nv++;
        }
    }
    L.num_vars = nv;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
    std::vector<double> b;
    std::vector<socp::Cone> cones;
    detail::TripletBuilder A;
    int row = 0;
    auto cone = [&](socp::Cone k, ConeRole role) {
        cones.push_back(k);
        L.roles.push_back(role);
    };
    auto add_b = [&](double v) {
        b.push_back(v);
        return row++;
    };

    const auto y = data.y;
    const double Nd = static_cast<double>(N);
    auto sample_row = [&](int n) { return E.row(gram.layout.sample(n)).transpose(); };

    // Loss and regularizer.
    if (objective.loss == Loss::SquaredError) {
        c[L.epigraph] = 1.0;
        const int start = row;
        A.add(add_b(0.0), L.epigraph, -1.0);
        for (int n = 0; n < N; ++n) {
            const int r = add_b(y[n]);
            A.add_row(r, L.theta(0), sample_row(n));
            if (objective.intercept) A.add(r, L.bias, 1.0);
        }
        if (ridge) {
            const double wf = std::sqrt(objective.lambda_f * Nd);
            for (int k = 0; k < R.rows(); ++k) A.add_row(add_b(0.0), L.theta(0), R.row(k).transpose(), -wf);
            if (L.num_bias > 0 && objective.lambda_b > 0.0) {
                const double wb = std::sqrt(objective.lambda_b * Nd);
                for (int j = 0; j < L.num_bias; ++j) A.add(add_b(0.0), L.bias + j, -wb);
            }
        }
        cone(socp::Cone::soc(row - start), ConeRole::Loss);
    } else {
        for (int q = 0; q < Q; ++q) {
            const double tau = objective.levels[q];
            for (int n = 0; n < N; ++n) {
                const int u = L.slack + q * N + n;
                c[u] = 1.0 / Nd;
                for (double w : {tau, tau - 1.0}) {
                    const int r = add_b(-w * y[n]);
                    A.add_row(r, L.theta(q), sample_row(n), -w);
                    if (objective.intercept) A.add(r, L.bias + q, -w);
                    A.add(r, u, -1.0);
                }
            }
        }
        cone(socp::Cone::nonneg(2 * N * Q), ConeRole::Loss);
        if (ridge) {
            // |R theta|^2 <= r  <=>  ((r + 1) / 2, (r - 1) / 2, R theta) in SOC.
            c[L.reg_f] = objective.lambda_f;
            const int start = row;
            A.add(add_b(0.5), L.reg_f, -0.5);
            A.add(add_b(-0.5), L.reg_f, -0.5);
            for (int q = 0; q < Q; ++q) {
                for (int k = 0; k < R.rows(); ++k) A.add_row(add_b(0.0), L.theta(q), R.row(k).transpose(), -1.0);
            }
            cone(socp::Cone::soc(row - start), ConeRole::Regularization);
            if (L.reg_b >= 0) {
                c[L.reg_b] = objective.lambda_b;
                const int sb = row;
                A.add(add_b(0.5), L.reg_b, -0.5);
                A.add(add_b(-0.5), L.reg_b, -0.5);
                for (int j = 0; j < L.num_bias; ++j) A.add(add_b(0.0), L.bias + j, -1.0);
                cone(socp::Cone::soc(row - sb), ConeRole::Regularization);
            }
        }
    }
    if (!ridge) {
        const int start = row;
        add_b(objective.lambda_f);
        for (int q = 0; q < Q; ++q) {
            for (int k = 0; k < R.rows(); ++k) A.add_row(add_b(0.0), L.theta(q), R.row(k).transpose(), -1.0);
        }
        cone(socp::Cone::soc(row - start), ConeRole::Regularization);
        if (L.num_bias > 0) {
            const int sb = row;
            add_b(objective.lambda_b);
            for (int j = 0; j < L.num_bias; ++j) A.add(add_b(0.0), L.bias + j, -1.0);
            cone(socp::Cone::soc(row - sb), ConeRole::Regularization);
        }
    }

    // (b0 - U b)_i + eta_im t_i <= D_i (W f - f0)_i (x_im), one row per center.
    if (I > 0) {
        const int start = row;
        for (int i = 0; i < I; ++i) {
            const auto &con = system.constraints[i];
            L.constraint_row.push_back(row);
            const auto &net = covering.nets[i];
            for (int m = 0; m < net.size(); ++m) {
                const int g = gram.layout.center(i, m);
                const double anchor_val = con.f0.is_zero() ? 0.0 : con.f0.apply(spec, con.op, net.centers.row(m).transpose());
                const int r = add_b(-con.b0 - anchor_val);
                for (int q = 0; q < Q; ++q) {
                    if (con.W_row[q] != 0.0) A.add_row(r, L.theta(q), E.row(g).transpose(), -con.W_row[q]);
                }
                if (L.num_bias > 0) {
                    for (int j = 0; j < L.num_bias; ++j) A.add(r, L.bias + j, -con.U_row[j]);
                }
                if (L.t[i] >= 0) A.add(r, L.t[i], covering.eta[i][m]);
            }
        }
        cone(socp::Cone::nonneg(row - start), ConeRole::Constraint);
    }

    // t_i >= |(W f - f0)_i|_k.
    for (int i = 0; i < I; ++i) {
        if (L.t[i] < 0) continue;
        const auto &con = system.constraints[i];
        const int start = row;
        A.add(add_b(0.0), L.t[i], -1.0);
        Eigen::VectorXd shift = Eigen::VectorXd::Zero(S.rows());
        if (out.anchor_of[i] >= 0) shift = S * anchor_coord[out.anchor_of[i]];
        for (int k = 0; k < S.rows(); ++k) {
            const int r = add_b(-shift[k]);
            for (int q = 0; q < Q; ++q) {
                if (con.W_row[q] != 0.0) A.add_row(r, L.theta(q), S.row(k).transpose(), -con.W_row[q]);
            }
        }
        cone(socp::Cone::soc(row - start), ConeRole::Tightening);
    }

    if (system.bias.kind == BiasSet::Kind::Box && L.num_bias > 0) {
        const int start = row;
        for (int j = 0; j < L.num_bias; ++j) {
            A.add(add_b(-system.bias.lower[j]), L.bias + j, -1.0);
            A.add(add_b(system.bias.upper[j]), L.bias + j, 1.0);
        }
        cone(socp::Cone::nonneg(row - start), ConeRole::BiasBox);
    }

    out.conic.c = c;
    out.conic.A = A.build(row, nv);
    out.conic.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    out.conic.cones = std::move(cones);
    out.conic.validate();
    return out;
}

/// Solves the assembled program and returns the fitted model.
inline FittedModel fit(const Dataset &data, const ObjectiveSpec &objective, const ConstraintSystem &system,
                       const Covering &covering, const KernelSpec &spec, Mode mode, const FitOptions &opts = {}) {
    const auto prog = assemble(data, objective, system, covering, spec, mode, opts);
    auto rep = socp::solve(prog.conic, opts.solver);
    if (rep.status != socp::Status::Optimal) {
        throw SolverFailure(std::string("solver returned ") + socp::to_string(rep.status) +
                                (rep.message.empty() ? "" : ": " + rep.message),
                            std::move(rep));
    }
    const auto &L = prog.layout;
    const Eigen::VectorXd &x = rep.primal;

    FittedModel m;
    m.kernel = spec;
    m.system = system;
    m.covering = covering;
    m.objective = objective;
    m.mode = mode;
    m.anchors = prog.anchors;
    m.samples = data.X;
    m.layout = prog.gram.layout;
    m.coef.resize(prog.coef_map.rows(), L.Q);
    m.norms.resize(L.Q);
    const bool orthonormal = opts.parametrization == Parametrization::Orthonormal;
    for (int q = 0; q < L.Q; ++q) {
        const Eigen::VectorXd th = x.segment(L.theta(q), L.p);
        m.coef.col(q) = prog.coef_map * th;
        m.norms[q] = orthonormal ? th.norm() : std::sqrt(std::max(0.0, th.dot(prog.gram.G * th)));
    }
    if (L.num_bias > 0) m.bias = x.segment(L.bias, L.num_bias);

    const double N = static_cast<double>(data.size());
    m.conic_objective = rep.objective;
    if (objective.loss == Loss::SquaredError) {
        // The epigraph holds the square root of N times the objective.
        const double s = x[L.epigraph];
        m.value = s * s / N;
        const auto fit_vals = (prog.gram.G.middleRows(prog.gram.layout.I, data.size()) * m.coef.col(0)).eval();
        Eigen::VectorXd res = data.y - fit_vals;
        if (m.adds_bias()) res.array() -= m.bias[0];
        m.loss = res.squaredNorm() / N;
        if (objective.regularization == Regularization::NormBall) m.value = m.loss;
    } else {
        m.loss = x.segment(L.slack, data.size() * L.Q).sum() / N;
        m.value = rep.objective;
    }
    m.report = std::move(rep);
    return m;
}

/// D f_q at each point (rows of `points`), one column per function.
inline Eigen::MatrixXd predict(const FittedModel &model, const DifferentialOperator &D, const PointSet &points,
                               bool with_bias = true) {
    const int d = model.dim();
    if (points.rows() > 0 && points.cols() != d) throw std::invalid_argument("points have the wrong dimension");
    check_operator(model.kernel, D, d);
    const auto gens = detail::model_generators(model);
    std::vector<int> active;
    for (int r = 0; r < static_cast<int>(gens.size()); ++r) {
        if (!model.coef.row(r).isZero(0.0)) active.push_back(r);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), model.num_functions());
    Eigen::RowVectorXd vals(model.coef.rows());
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
        const Generator probe{Generator::Kind::Section, D, points.row(n).transpose(), nullptr};
        vals.setZero();
        for (int r : active) vals[r] = detail::generator_inner(model.kernel, gens[r], probe);
        out.row(n) = vals * model.coef;
    }
    if (with_bias && D.is_identity() && model.adds_bias()) out.rowwise() += model.bias.transpose();
    return out;
}

/// |f_a[qa] - f_b[qb]|_k from the Gram matrix of the union of both generator sets.
inline double rkhs_distance(const FittedModel &a, int qa, const FittedModel &b, int qb) {
    if (!(a.kernel == b.kernel)) throw std::invalid_argument("models use different kernels");
    if (qa < 0 || qa >= a.num_functions() || qb < 0 || qb >= b.num_functions()) {
        throw std::out_of_range("function index out of range");
    }
    const auto ga = detail::model_generators(a);
    const auto gb = detail::model_generators(b);
    auto same = [](const Generator &x, const Generator &y) {
        if (x.kind != y.kind) return false;
        if (x.kind == Generator::Kind::Anchor) {
            return x.anchor->weights == y.anchor->weights && x.anchor->centers == y.anchor->centers;
        }
        return x.op == y.op && x.point == y.point;
    };
    std::vector<Generator> all;
    std::vector<double> coef;
    auto push = [&](const std::vector<Generator> &gens, const Eigen::VectorXd &c, double sign) {
        for (std::size_t r = 0; r < gens.size(); ++r) {
            if (c[static_cast<Eigen::Index>(r)] == 0.0) continue;
            std::size_t k = 0;
            while (k < all.size() && !same(all[k], gens[r])) ++k;
            if (k == all.size()) {
                all.push_back(gens[r]);
                coef.push_back(0.0);
            }
            coef[k] += sign * c[static_cast<Eigen::Index>(r)];
        }
    };
    push(ga, a.coef.col(qa), 1.0);
    push(gb, b.coef.col(qb), -1.0);
    if (all.empty()) return 0.0;
    const Eigen::MatrixXd G = gram_matrix(a.kernel, all);
    const Eigen::Map<const Eigen::VectorXd> c(coef.data(), static_cast<Eigen::Index>(coef.size()));
    return std::sqrt(std::max(0.0, c.dot(G * c)));
}

/// Strong-convexity modulus in f of the ridge objective.
inline double ridge_strong_convexity(const ObjectiveSpec &objective) {
    if (objective.regularization != Regularization::Ridge) {
        throw std::invalid_argument("norm-ball objectives carry no strong convexity in f; supply mu explicitly");
    }
    return 2.0 * objective.lambda_f;
}

inline double aposteriori_bound(double v_eta, double v_disc, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    const double gap = v_eta - v_disc;
    if (gap < -1e-9) throw std::invalid_argument("v_eta is below v_disc");
    return std::sqrt(2.0 * std::max(0.0, gap) / mu);
}

inline double apriori_bound(double eta_inf, double L_b, double c_f, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (eta_inf < 0.0 || L_b < 0.0 || c_f < 0.0) throw std::invalid_argument("bound inputs must be non-negative");
    return std::sqrt(2.0 * L_b * c_f * eta_inf / mu);
}

/// sqrt(I) |U^+|_2 max_i |(W f - f0)_i|_k for a full row rank U.
inline double apriori_constant(const Eigen::MatrixXd &U, const Eigen::VectorXd &constraint_norms) {
    const auto I = U.rows();
    if (I == 0) throw std::invalid_argument("empty U");
    if (constraint_norms.size() != I) throw std::invalid_argument("one norm per constraint is required");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(U);
    const auto &sv = svd.singularValues();
    if (sv.size() < I || sv[I - 1] <= 1e-12 * std::max(1.0, sv[0])) {
        throw std::invalid_argument("U must have full row rank");
    }
    return std::sqrt(static_cast<double>(I)) / sv[I - 1] * constraint_norms.maxCoeff();
}

}  // namespace shapekern
