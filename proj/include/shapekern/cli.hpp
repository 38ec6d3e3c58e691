#pragma once

// Command implementations behind the `shapekern` executable. Each command takes
// parsed options and returns its output; argument parsing and exit codes live
// in tools/main.cpp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapekern/datasets.hpp"
#include "shapekern/estimator.hpp"
#include "shapekern/io.hpp"
#include "shapekern/verify.hpp"

namespace shapekern::cli {

using io::DataError;
using io::json;

/// Bad command-line usage (exit code 1).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---- configuration ------------------------------------------------------------

struct RunConfig {
    std::string data_path;
    std::string target = "y";
    std::vector<std::string> features;  // empty: every column but the target
    bool standardize = true;

    ObjectiveSpec objective;
    bool lambda_b_auto = false;  // norm ball on b of radius 10 max |y|

    KernelSpec kernel;
    bool sigma_deciles = false;

    json constraints = json::object();

    std::string covering_mode = "uniform";  // uniform | grid | anchored | recycled
    double delta = 0.1;
    int per_axis = 20;
    int max_added = 100;
    Norm norm = Norm::L2;
    EtaMode eta_mode = EtaMode::PerCenter;

    FitOptions fit;
    Mode mode = Mode::Tightened;

    int cv_folds = 0;
    std::vector<double> sigma_grid;  // empty with sigma_deciles: decile grid
    std::vector<double> lambda_grid;
    std::uint64_t seed = 0;
};

inline const char *method_name(socp::Method m) {
    switch (m) {
        case socp::Method::Auto: return "auto";
        case socp::Method::OperatorSplitting: return "operator_splitting";
        case socp::Method::InteriorPoint: return "interior_point";
    }
    return "auto";
}

inline json to_json(const RunConfig &c) {
    json objective = io::to_json(c.objective);
    if (c.lambda_b_auto) objective["lambda_b"] = "auto";
    json kernel = io::to_json(c.kernel);
    if (c.sigma_deciles) kernel["sigma"] = "decile-grid";
    return {{"data", {{"path", c.data_path}, {"target", c.target}, {"features", c.features}, {"standardize", c.standardize}}},
            {"objective", objective},
            {"kernel", kernel},
            {"constraints", c.constraints},
            {"covering",
             {{"mode", c.covering_mode},
              {"delta", c.delta},
              {"per_axis", c.per_axis},
              {"max_added", c.max_added},
              {"norm", c.norm == Norm::L2 ? "l2" : "linf"},
              {"eta", c.eta_mode == EtaMode::PerCenter ? "per_center" : "uniform_max"}}},
            {"solver",
             {{"tol", c.fit.solver.tol},
              {"max_iter", c.fit.solver.max_iter},
              {"method", method_name(c.fit.solver.method)},
              {"eps_tol", c.fit.eps_tol},
              {"parametrization", c.fit.parametrization == Parametrization::Orthonormal ? "orthonormal" : "representer"}}},
            {"mode", io::to_string(c.mode)},
            {"cv", {{"folds", c.cv_folds}, {"sigma_grid", c.sigma_grid}, {"lambda_grid", c.lambda_grid}}},
            {"seed", c.seed}};
}

/// Parses and validates a run configuration (the data file is not read).
inline RunConfig parse_config(const json &j) {
    if (!j.is_object()) throw DataError("configuration must be a JSON object");
    RunConfig c;
    try {
        const auto &data = j.at("data");
        c.data_path = data.at("path").get<std::string>();
        c.target = data.value("target", c.target);
        c.features = data.value("features", c.features);
        c.standardize = data.value("standardize", c.standardize);

        const json objective = j.value("objective", json::object());
        json obj = objective;
        if (obj.contains("lambda_b") && obj["lambda_b"].is_string()) {
            if (obj["lambda_b"] != "auto") throw DataError("lambda_b must be a number or \"auto\"");
            c.lambda_b_auto = true;
            obj.erase("lambda_b");
        }
        c.objective = io::objective_from(obj);
        if (c.objective.regularization == Regularization::NormBall && !obj.contains("lambda_b")) c.lambda_b_auto = true;

        json kernel = j.value("kernel", json{{"family", "gaussian"}, {"sigma", 1.0}});
        if (kernel.contains("sigma") && kernel["sigma"].is_string()) {
            if (kernel["sigma"] != "decile-grid") throw DataError("sigma must be a number or \"decile-grid\"");
            c.sigma_deciles = true;
            kernel["sigma"] = 1.0;
        }
        c.kernel = io::kernel_from(kernel);

        c.constraints = j.value("constraints", json::object());
        if (!c.constraints.is_object()) throw DataError("constraints must be an object");

        const json cov = j.value("covering", json::object());
        c.covering_mode = cov.value("mode", c.covering_mode);
        if (c.covering_mode != "uniform" && c.covering_mode != "grid" && c.covering_mode != "anchored" &&
            c.covering_mode != "recycled") {
            throw DataError("unknown covering mode '" + c.covering_mode + "'");
        }
        c.delta = cov.value("delta", c.delta);
        c.per_axis = cov.value("per_axis", c.per_axis);
        c.max_added = cov.value("max_added", c.max_added);
        c.norm = io::norm_from(cov.value("norm", std::string("l2")));
        const auto eta = cov.value("eta", std::string("per_center"));
        if (eta == "per_center") {
            c.eta_mode = EtaMode::PerCenter;
        } else if (eta == "uniform_max") {
            c.eta_mode = EtaMode::UniformMax;
        } else {
            throw DataError("unknown eta mode '" + eta + "'");
        }
        if (!(c.delta > 0.0) || c.per_axis < 1 || c.max_added < 0) throw DataError("invalid covering parameters");

        const json solver = j.value("solver", json::object());
        c.fit.solver.tol = solver.value("tol", c.fit.solver.tol);
        c.fit.solver.max_iter = solver.value("max_iter", c.fit.solver.max_iter);
        c.fit.eps_tol = solver.value("eps_tol", c.fit.eps_tol);
        const auto method = solver.value("method", std::string("auto"));
        if (method == "auto") {
            c.fit.solver.method = socp::Method::Auto;
        } else if (method == "interior_point") {
            c.fit.solver.method = socp::Method::InteriorPoint;
        } else if (method == "operator_splitting") {
            c.fit.solver.method = socp::Method::OperatorSplitting;
        } else {
            throw DataError("unknown solver method '" + method + "'");
        }
        const auto par = solver.value("parametrization", std::string("orthonormal"));
        if (par == "orthonormal") {
            c.fit.parametrization = Parametrization::Orthonormal;
        } else if (par == "representer") {
            c.fit.parametrization = Parametrization::Representer;
        } else {
            throw DataError("unknown parametrization '" + par + "'");
        }
        if (!(c.fit.solver.tol > 0.0) || c.fit.solver.max_iter < 1 || c.fit.eps_tol < 0.0) {
            throw DataError("invalid solver settings");
        }

        c.mode = io::mode_from(j.value("mode", std::string("tightened")));

        const json cv = j.value("cv", json::object());
        c.cv_folds = cv.value("folds", 0);
        c.sigma_grid = cv.value("sigma_grid", std::vector<double>{});
        c.lambda_grid = cv.value("lambda_grid", std::vector<double>{});
        if (c.cv_folds == 1 || c.cv_folds < 0) throw DataError("cv folds must be 0 (off) or at least 2");
        c.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception &e) {
        throw DataError(std::string("configuration: ") + e.what());
    }
    if (c.objective.loss == Loss::Pinball) {
        // Validated again once lambda_b is known.
        auto o = c.objective;
        if (c.lambda_b_auto) o.lambda_b = 1.0;
        try {
            o.validate();
        } catch (const std::invalid_argument &e) {
            throw DataError(std::string("objective: ") + e.what());
        }
    }
    return c;
}

// ---- data ---------------------------------------------------------------------

struct LoadedData {
    Dataset raw;  // original units
    Dataset model;  // inputs after standardization
    io::Standardization standardization;
    std::vector<std::string> features;
};

inline LoadedData load_data(const RunConfig &cfg, const std::string &base_dir = "") {
    std::string path = cfg.data_path;
    if (!base_dir.empty() && !path.empty() && path[0] != '/') path = base_dir + "/" + path;
    const auto table = io::read_csv_file(path);
    LoadedData out;
    const int target = table.column(cfg.target);
    out.features = cfg.features;
    if (out.features.empty()) {
        for (const auto &h : table.header) {
            if (h != cfg.target) out.features.push_back(h);
        }
    }
    if (out.features.empty()) throw DataError("no feature columns");
    out.raw.X.resize(table.values.rows(), static_cast<Eigen::Index>(out.features.size()));
    for (std::size_t k = 0; k < out.features.size(); ++k) {
        out.raw.X.col(static_cast<Eigen::Index>(k)) = table.values.col(table.column(out.features[k]));
    }
    out.raw.y = table.values.col(target);
    if (out.raw.X.rows() == 0) throw DataError(path + ": no data rows");
    if (!out.raw.X.allFinite() || !out.raw.y.allFinite()) throw DataError(path + ": non-finite values");
    if (cfg.standardize) {
        const Eigen::Index d = out.raw.X.cols();
        out.standardization.shift = out.raw.X.colwise().mean().transpose();
        out.standardization.scale.resize(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double var = (out.raw.X.col(j).array() - out.standardization.shift[j]).square().mean();
            out.standardization.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
    }
    out.model.X = out.standardization.apply(out.raw.X);
    out.model.y = out.raw.y;
    return out;
}

// ---- constraints --------------------------------------------------------------

/// The constraint expressed in model (standardized) coordinates: the box maps
/// affinely and each derivative term picks up prod_j scale_j^{r_j}.
inline ShapeConstraint to_model_coordinates(const ShapeConstraint &c, const io::Standardization &s) {
    if (!s.active()) return c;
    ShapeConstraint out = c;
    out.domain.lower = (c.domain.lower - s.shift).cwiseQuotient(s.scale);
    out.domain.upper = (c.domain.upper - s.shift).cwiseQuotient(s.scale);
    std::vector<DifferentialOperator::Term> terms;
    for (auto t : c.op.terms()) {
        for (std::size_t j = 0; j < t.index.size(); ++j) t.gamma /= std::pow(s.scale[static_cast<Eigen::Index>(j)], t.index[j]);
        terms.push_back(std::move(t));
    }
    out.op = DifferentialOperator(std::move(terms));
    if (!c.f0.is_zero()) out.f0.centers = s.apply(c.f0.centers);
    return out;
}

inline CatalogShape catalog_shape_from(const std::string &name) {
    if (name == "n_monotone") return CatalogShape::NMonotone;
    if (name == "alternating_monotone") return CatalogShape::AlternatingMonotone;
    if (name == "weak_majorization") return CatalogShape::WeakMajorizationMonotone;
    if (name == "product_order") return CatalogShape::ProductOrderMonotone;
    if (name == "supermodular") return CatalogShape::Supermodular;
    throw DataError("unknown catalog shape '" + name + "'");
}

/// Builds the constraint system of a configuration. Domains (original units)
/// default to the bounding box of the raw features.
///
/// Entry types: monotone_increasing, monotone_decreasing, convex, nonnegative
/// (with "axis", "function" and an optional lower bound "b0"), non_crossing (expands to Q - 1 rows), catalog
/// ("shape", "n", "function") and custom ({operator, U, W, b0, f0}).
inline ConstraintSystem build_system(const json &spec_json, const ObjectiveSpec &objective, const KernelSpec &kernel,
                                     const LoadedData &data) {
    ConstraintSystem sys;
    const bool pinball = objective.loss == Loss::Pinball;
    sys.Q = spec_json.value("Q", objective.num_functions());
    sys.P = spec_json.value("P", pinball ? sys.Q : 1);
    sys.bias = spec_json.contains("bias") ? io::bias_from(spec_json["bias"])
                                          : (pinball ? BiasSet::free() : BiasSet::zero());
    const int d = static_cast<int>(data.raw.X.cols());
    const CompactBox data_box{data.raw.X.colwise().minCoeff().transpose(), data.raw.X.colwise().maxCoeff().transpose()};

    std::vector<ShapeConstraint> raw;
    for (const auto &item : spec_json.value("items", json::array())) {
        const auto type = item.at("type").get<std::string>();
        const CompactBox box = item.contains("domain") ? io::box_from(item["domain"]) : data_box;
        if (box.dim() != d) throw DataError("constraint domain has the wrong dimension");
        const int axis = item.value("axis", 0);
        const int q = item.value("function", 0);
        if (q < 0 || q >= sys.Q) throw DataError("constraint refers to function " + std::to_string(q));
        if (type == "monotone_increasing") {
            raw.push_back(monotone_increasing(axis, box, sys.Q, q, sys.P));
        } else if (type == "monotone_decreasing") {
            raw.push_back(monotone_decreasing(axis, box, sys.Q, q, sys.P));
        } else if (type == "convex") {
            raw.push_back(convex_along(axis, box, sys.Q, q, sys.P));
        } else if (type == "nonnegative") {
            raw.push_back(nonnegative(box, sys.Q, q, sys.P));
        } else if (type == "non_crossing") {
            if (sys.P != sys.Q) throw DataError("non-crossing needs one bias per function");
            const auto nc = non_crossing_system(sys.Q, box);
            raw.insert(raw.end(), nc.constraints.begin(), nc.constraints.end());
        } else if (type == "catalog") {
            CatalogParams p;
            p.n = item.value("n", 1);
            p.Q = sys.Q;
            p.q = q;
            p.P = sys.P;
            const auto cs = catalog(catalog_shape_from(item.at("shape").get<std::string>()), box, kernel, p);
            raw.insert(raw.end(), cs.begin(), cs.end());
        } else if (type == "custom") {
            json full = item;
            full["domain"] = io::to_json(box);
            raw.push_back(io::constraint_from(full));
        } else {
            throw DataError("unknown constraint type '" + type + "'");
        }
        const bool single = type != "non_crossing" && type != "catalog" && type != "custom";
        if (single && item.contains("b0")) raw.back().b0 = item["b0"].get<double>();
        if (item.contains("label") && type != "non_crossing" && type != "catalog") raw.back().label = item["label"];
    }
    for (const auto &c : raw) sys.constraints.push_back(to_model_coordinates(c, data.standardization));
    try {
        sys.validate();
    } catch (const OrderError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw DataError(std::string("constraints: ") + e.what());
    }
    return sys;
}

inline Covering build_covering(const RunConfig &cfg, const ConstraintSystem &sys, const KernelSpec &kernel,
                               const PointSet &samples) {
    if (cfg.covering_mode == "uniform") return uniform_covering(sys, kernel, cfg.delta, cfg.norm, cfg.eta_mode);
    if (cfg.covering_mode == "grid") return grid_covering(sys, kernel, cfg.per_axis, cfg.norm, cfg.eta_mode);
    if (cfg.covering_mode == "anchored") return anchored_grid_covering(sys, kernel, cfg.per_axis, cfg.norm, cfg.eta_mode);
    return recycled_covering(sys, kernel, samples, cfg.max_added, cfg.norm, cfg.eta_mode);
}

// ---- cross-validation ---------------------------------------------------------

/// sqrt of the 10%, ..., 90% quantiles of the squared pairwise distances.
inline std::vector<double> decile_sigmas(const PointSet &X) {
    std::vector<double> d2;
    for (Eigen::Index a = 0; a < X.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < X.rows(); ++b) d2.push_back((X.row(a) - X.row(b)).squaredNorm());
    }
    if (d2.empty()) throw DataError("need at least two samples for the bandwidth grid");
    std::sort(d2.begin(), d2.end());
    std::vector<double> out;
    for (int k = 1; k <= 9; ++k) {
        const double pos = k / 10.0 * static_cast<double>(d2.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, d2.size() - 1);
        const double v = d2[lo] + (pos - static_cast<double>(lo)) * (d2[hi] - d2[lo]);
        if (v > 0.0 && (out.empty() || std::sqrt(v) > out.back())) out.push_back(std::sqrt(v));
    }
    if (out.empty()) throw DataError("all samples coincide");
    return out;
}

inline double held_out_loss(const FittedModel &m, const Dataset &val) {
    const Eigen::MatrixXd pred = predict(m, DifferentialOperator::identity(val.dim()), val.X, true);
    double total = 0.0;
    for (int q = 0; q < m.num_functions(); ++q) {
        for (int n = 0; n < val.size(); ++n) {
            const double e = val.y[n] - pred(n, q);
            total += m.objective.loss == Loss::SquaredError ? e * e : std::max(m.objective.levels[q] * e, (m.objective.levels[q] - 1.0) * e);
        }
    }
    return total / val.size();
}

inline Dataset subset(const Dataset &d, const std::vector<int> &rows) {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), d.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = d.X.row(rows[k]);
        out.y[static_cast<Eigen::Index>(k)] = d.y[rows[k]];
    }
    return out;
}

struct CvResult {
    double sigma = 0.0;
    double lambda = 0.0;
    double score = std::numeric_limits<double>::infinity();
    json table = json::array();
};

/// k-fold search over (sigma, lambda_f). Ties go to the larger sigma, then to
/// the more regularized lambda.
inline CvResult cross_validate(const RunConfig &cfg, const LoadedData &data, const ObjectiveSpec &objective,
                               const ConstraintSystem &sys) {
    const int N = data.model.size();
    const int K = cfg.cv_folds;
    if (N < K) throw DataError("fewer samples than folds");
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    detail::SplitMix64 rng(cfg.seed);
    for (int k = N - 1; k > 0; --k) std::swap(perm[k], perm[static_cast<int>(rng.next() % static_cast<std::uint64_t>(k + 1))]);

    std::vector<double> sigmas = cfg.sigma_grid;
    if (sigmas.empty()) sigmas = cfg.sigma_deciles ? decile_sigmas(data.model.X) : std::vector<double>{cfg.kernel.sigma};
    std::vector<double> lambdas = cfg.lambda_grid;
    if (lambdas.empty()) {
        if (objective.regularization == Regularization::NormBall) {
            for (int k = 0; k <= 6; ++k) lambdas.push_back(std::pow(10.0, -1.0 + 0.5 * k));
        } else {
            lambdas.push_back(objective.lambda_f);
        }
    }
    std::sort(sigmas.begin(), sigmas.end(), std::greater<>());
    // Most regularized first: small radius for the ball, large weight for ridge.
    if (objective.regularization == Regularization::NormBall) {
        std::sort(lambdas.begin(), lambdas.end());
    } else {
        std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    }

    CvResult best;
    for (double sigma : sigmas) {
        KernelSpec kernel = cfg.kernel;
        kernel.sigma = sigma;
        kernel.validate();
        for (double lam : lambdas) {
            ObjectiveSpec obj = objective;
            obj.lambda_f = lam;
            double score = 0.0;
            for (int f = 0; f < K && std::isfinite(score); ++f) {
                std::vector<int> train, val;
                for (int n = 0; n < N; ++n) (n % K == f ? val : train).push_back(perm[n]);
                const auto tr = subset(data.model, train);
                try {
                    const auto cov = build_covering(cfg, sys, kernel, tr.X);
                    const auto m = fit(tr, obj, sys, cov, kernel, cfg.mode, cfg.fit);
                    score += held_out_loss(m, subset(data.model, val)) / K;
                } catch (const SolverFailure &) {
                    score = std::numeric_limits<double>::infinity();
                }
            }
            best.table.push_back({{"sigma", sigma}, {"lambda_f", lam}, {"score", std::isfinite(score) ? json(score) : json()}});
            const double tie = 1e-12 * std::max(1.0, std::abs(best.score));
            if (score < best.score - tie) {
                best.sigma = sigma;
                best.lambda = lam;
                best.score = score;
            }
        }
    }
    if (!std::isfinite(best.score)) throw SolverFailure("every cross-validation fit failed", {});
    return best;
}

// ---- commands -----------------------------------------------------------------

struct FitOutput {
    io::ModelFile file;
    std::string summary;
};

inline json provenance(const Dataset &raw, const KernelSpec &kernel, const ConstraintSystem &sys,
                       const ObjectiveSpec &objective) {
    return {{"data", io::checksum({{"X", io::to_json(raw.X)}, {"y", io::to_json(raw.y)}})},
            {"kernel", io::checksum(io::to_json(kernel))},
            {"constraints", io::checksum(io::to_json(sys))},
            {"objective", io::checksum(io::to_json(objective))}};
}

inline FitOutput cmd_fit(const RunConfig &cfg, const std::string &base_dir = "") {
    const auto data = load_data(cfg, base_dir);
    ObjectiveSpec objective = cfg.objective;
    if (cfg.lambda_b_auto) objective.lambda_b = 10.0 * data.raw.y.cwiseAbs().maxCoeff();
    if (objective.regularization == Regularization::NormBall && !(objective.lambda_b > 0.0)) objective.lambda_b = 1.0;
    try {
        objective.validate();
    } catch (const std::invalid_argument &e) {
        throw DataError(std::string("objective: ") + e.what());
    }
    KernelSpec kernel = cfg.kernel;
    const auto sys = build_system(cfg.constraints, objective, kernel, data);

    std::ostringstream summary;
    std::optional<CvResult> cv;
    if (cfg.cv_folds >= 2) {
        cv = cross_validate(cfg, data, objective, sys);
        kernel.sigma = cv->sigma;
        objective.lambda_f = cv->lambda;
    } else if (cfg.sigma_deciles) {
        throw DataError("sigma \"decile-grid\" needs cross-validation (cv.folds >= 2)");
    }

    const auto cov = build_covering(cfg, sys, kernel, data.model.X);
    auto model = fit(data.model, objective, sys, cov, kernel, cfg.mode, cfg.fit);

    FitOutput out;
    out.file.model = std::move(model);
    out.file.standardization = data.standardization;
    out.file.feature_names = data.features;
    out.file.target_name = cfg.target;
    out.file.provenance = provenance(data.raw, kernel, sys, objective);
    if (cv) out.file.provenance["cv"] = {{"sigma", cv->sigma}, {"lambda_f", cv->lambda}, {"score", cv->score}};

    const auto &m = out.file.model;
    summary << "mode: " << io::to_string(m.mode) << "\n";
    summary << "samples: " << m.samples.rows() << ", features: " << m.dim() << ", functions: " << m.num_functions() << "\n";
    summary << "kernel: " << (kernel.family == KernelFamily::Gaussian ? "gaussian sigma=" + io::format_double(kernel.sigma)
                                                                     : "polynomial degree=" + std::to_string(kernel.degree))
            << "\n";
    summary << "lambda_f: " << io::format_double(objective.lambda_f) << ", lambda_b: " << io::format_double(objective.lambda_b)
            << "\n";
    if (cv) summary << "cv: " << cfg.cv_folds << " folds, score " << io::format_double(cv->score) << "\n";
    for (int i = 0; i < sys.size(); ++i) {
        summary << "constraint " << i << (sys.constraints[i].label.empty() ? "" : " (" + sys.constraints[i].label + ")")
                << ": M=" << cov.nets[i].size() << ", eta max=" << io::format_double(cov.eta_max(i)) << "\n";
    }
    summary << "objective value: " << io::format_double(m.value) << " (conic " << io::format_double(m.conic_objective)
            << ", loss " << io::format_double(m.loss) << ")\n";
    summary << "solver: " << m.report.method << ", " << socp::to_string(m.report.status) << ", " << m.report.iterations
            << " iterations\n";
    out.summary = summary.str();
    return out;
}

/// "lo:hi:n" per axis, comma separated; tensor grid in original units.
inline PointSet parse_grid(const std::string &spec, int dim) {
    std::vector<std::string> axes;
    std::string cur;
    for (char ch : spec + ",") {
        if (ch == ',') {
            axes.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (static_cast<int>(axes.size()) != dim) {
        throw UsageError("grid has " + std::to_string(axes.size()) + " axes, model expects " + std::to_string(dim));
    }
    std::vector<Eigen::VectorXd> ticks;
    long total = 1;
    for (const auto &a : axes) {
        double lo = 0.0, hi = 0.0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(a);
        if (!(is >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 0 || !is.eof()) {
            throw UsageError("bad grid axis '" + a + "', expected lo:hi:n");
        }
        Eigen::VectorXd t(n);
        for (int k = 0; k < n; ++k) t[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
        ticks.push_back(t);
        total *= n;
    }
    PointSet pts(total, dim);
    std::vector<int> idx(dim, 0);
    for (long r = 0; r < total; ++r) {
        for (int j = 0; j < dim; ++j) pts(r, j) = ticks[j][idx[j]];
        for (int j = dim - 1; j >= 0; --j) {
            if (++idx[j] < ticks[j].size()) break;
            idx[j] = 0;
        }
    }
    return pts;
}

struct DerivativeRequest {
    int axis = 0;
    int order = 1;
};

/// Predictions at raw points: coordinates, f_q + b_q, then one block of Q
/// columns per requested derivative (in original units, without bias).
inline io::Table cmd_predict(const io::ModelFile &file, const PointSet &raw_points,
                             const std::vector<DerivativeRequest> &derivs = {}) {
    const auto &m = file.model;
    const int d = m.dim();
    if (raw_points.cols() != d && raw_points.rows() > 0) throw DataError("points have the wrong dimension");
    io::Table t;
    for (int j = 0; j < d; ++j) {
        t.header.push_back(j < static_cast<int>(file.feature_names.size()) ? file.feature_names[j] : "x" + std::to_string(j));
    }
    const int Q = m.num_functions();
    for (int q = 0; q < Q; ++q) t.header.push_back("f" + std::to_string(q));
    for (const auto &dr : derivs) {
        if (dr.axis < 0 || dr.axis >= d || dr.order < 0) throw UsageError("bad derivative request");
        for (int q = 0; q < Q; ++q) {
            t.header.push_back("d" + std::to_string(dr.order) + "_x" + std::to_string(dr.axis) + "_f" + std::to_string(q));
        }
    }
    const PointSet pts = file.standardization.apply(raw_points);
    t.values.resize(raw_points.rows(), static_cast<Eigen::Index>(t.header.size()));
    if (raw_points.rows() == 0) return t;
    t.values.leftCols(d) = raw_points;
    t.values.middleCols(d, Q) = predict(m, DifferentialOperator::identity(d), pts, true);
    int col = d + Q;
    for (const auto &dr : derivs) {
        const auto op = DifferentialOperator::axis(d, dr.axis, dr.order);
        double factor = 1.0;
        if (file.standardization.active()) factor = std::pow(file.standardization.scale[dr.axis], -dr.order);
        t.values.middleCols(col, Q) = factor * predict(m, op, pts, false);
        col += Q;
    }
    return t;
}

struct VerifyOutput {
    json report;
    io::Table margins;  // per grid point and constraint
};

/// Checks the model's own constraints, or those of `cfg` when given.
inline VerifyOutput cmd_verify(const io::ModelFile &file, const std::optional<RunConfig> &cfg, int grid_points_per_axis,
                               const std::string &base_dir = "") {
    const auto &m = file.model;
    ConstraintSystem sys = m.system;
    if (cfg) {
        LoadedData pseudo;
        try {
            pseudo = load_data(*cfg, base_dir);
        } catch (const DataError &) {
            // Without the data file the model's samples fix the default domain.
            pseudo.model.X = m.samples;
            pseudo.raw.X = m.samples;
            if (file.standardization.active()) {
                for (Eigen::Index r = 0; r < m.samples.rows(); ++r) {
                    pseudo.raw.X.row(r) = m.samples.row(r).cwiseProduct(file.standardization.scale.transpose()) +
                                          file.standardization.shift.transpose();
                }
            }
        }
        pseudo.standardization = file.standardization;
        sys = build_system(cfg->constraints, m.objective, m.kernel, pseudo);
        if (sys.Q != m.num_functions()) throw DataError("configuration and model disagree on the number of functions");
    }
    const auto rep = check_constraints(m, sys, grid_points_per_axis);
    VerifyOutput out;
    out.report = io::to_json(rep);
    out.report["worst_gap"] = sys.empty() ? json() : json(rep.worst_gap());
    const int d = m.dim();
    for (int j = 0; j < d; ++j) out.margins.header.push_back("x" + std::to_string(j));
    out.margins.header.push_back("constraint");
    out.margins.header.push_back("margin");
    std::vector<Eigen::RowVectorXd> rows;
    for (int i = 0; i < sys.size(); ++i) {
        const PointSet grid = detail::closed_grid(sys.constraints[i].domain, grid_points_per_axis);
        const Eigen::VectorXd marg = constraint_margins(m, sys, i, grid);
        const PointSet raw = [&] {
            if (!file.standardization.active()) return grid;
            PointSet r = grid;
            for (Eigen::Index k = 0; k < grid.rows(); ++k) {
                r.row(k) = grid.row(k).cwiseProduct(file.standardization.scale.transpose()) + file.standardization.shift.transpose();
            }
            return r;
        }();
        for (Eigen::Index k = 0; k < grid.rows(); ++k) {
            Eigen::RowVectorXd row(d + 2);
            row.head(d) = raw.row(k);
            row[d] = i;
            row[d + 1] = marg[k];
            rows.push_back(row);
        }
    }
    out.margins.values.resize(static_cast<Eigen::Index>(rows.size()), d + 2);
    for (std::size_t k = 0; k < rows.size(); ++k) out.margins.values.row(static_cast<Eigen::Index>(k)) = rows[k];
    return out;
}

/// A-posteriori radius from a tightened and a discretized model of the same
/// problem. mu defaults to 2 lambda_f for ridge objectives.
inline json cmd_bounds(const io::ModelFile &tightened, const io::ModelFile &discretized, std::optional<double> mu) {
    for (const char *key : {"data", "kernel", "constraints", "objective"}) {
        if (tightened.provenance.value(key, json()) != discretized.provenance.value(key, json())) {
            throw DataError(std::string("models differ in their ") + key + " checksum");
        }
    }
    const double m = mu ? *mu : ridge_strong_convexity(tightened.model.objective);
    if (!(m > 0.0)) throw UsageError("mu must be positive");
    const double v_eta = tightened.model.value;
    const double v_disc = discretized.model.value;
    return {{"v_eta", v_eta},
            {"v_disc", v_disc},
            {"mu", m},
            {"eta_inf", tightened.model.covering.eta_inf()},
            {"radius", aposteriori_bound(v_eta, v_disc, m)}};
}

/// CSV text of a synthetic data set: "quadratic" (needs xi) or "heteroscedastic".
inline std::string cmd_gen_synthetic(const std::string &kind, int n, double xi, std::uint64_t seed) {
    if (n < 1) throw UsageError("n must be positive");
    Dataset d;
    if (kind == "quadratic") {
        if (!(xi >= 0.0)) throw UsageError("xi must be non-negative");
        d = quadratic_dataset(n, xi, seed);
    } else if (kind == "heteroscedastic") {
        d = heteroscedastic_dataset(n, seed);
    } else {
        throw UsageError("unknown synthetic data kind '" + kind + "'");
    }
    Eigen::MatrixXd values(n, 2);
    values.col(0) = d.X.col(0);
    values.col(1) = d.y;
    std::ostringstream os;
    io::write_csv(os, {"x", "y"}, values);
    return os.str();
}

}  // namespace shapekern::cli
