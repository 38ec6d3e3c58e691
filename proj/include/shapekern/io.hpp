#pragma once

// JSON and CSV plumbing for models, constraint systems, coverings and reports.

#include <Eigen/Dense>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapekern/estimator.hpp"
#include "shapekern/verify.hpp"

namespace shapekern::io {

using json = nlohmann::json;

/// Malformed input file or document; `line` is 1-based, 0 when unknown.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string &what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
    int line;
};

// ---- Eigen <-> JSON ----------------------------------------------------------

inline json to_json(const Eigen::VectorXd &v) {
    json j = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
    return j;
}

template <typename Derived>
json rows_to_json(const Eigen::MatrixBase<Derived> &m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    return j;
}

inline json to_json(const Eigen::MatrixXd &m) { return rows_to_json(m); }
inline json to_json(const PointSet &m) { return rows_to_json(m); }

inline Eigen::VectorXd vector_from(const json &j) {
    if (!j.is_array()) throw DataError("expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) throw DataError("expected a number");
        v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
    }
    return v;
}

// Row-major; `cols` fixes the width of an empty matrix.
inline Eigen::MatrixXd matrix_from(const json &j, Eigen::Index cols = 0) {
    if (!j.is_array()) throw DataError("expected an array of rows");
    if (j.empty()) return Eigen::MatrixXd(0, cols);
    const auto c = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), c);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto row = vector_from(j[r]);
        if (row.size() != c) throw DataError("ragged matrix");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

// Number under `key`; null (how non-finite values are written) and absence
// give `fallback`.
inline double number_or(const json &j, const char *key, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<double>();
}

// ---- building blocks ----------------------------------------------------------

inline json to_json(const KernelSpec &k) {
    if (k.family == KernelFamily::Gaussian) return {{"family", "gaussian"}, {"sigma", k.sigma}, {"smoothness", k.smoothness}};
    return {{"family", "polynomial"}, {"degree", k.degree}, {"offset", k.offset}, {"smoothness", k.smoothness}};
}

inline KernelSpec kernel_from(const json &j) {
    const auto family = j.value("family", std::string("gaussian"));
    if (family == "gaussian") return KernelSpec::gaussian(j.at("sigma").get<double>(), j.value("smoothness", kMaxGaussianOrder));
    if (family == "polynomial") {
        const int degree = j.at("degree").get<int>();
        return KernelSpec::polynomial(degree, j.value("offset", 1.0), j.value("smoothness", degree));
    }
    throw DataError("unknown kernel family '" + family + "'");
}

inline json to_json(const DifferentialOperator &op) {
    json j = json::array();
    for (const auto &t : op.terms()) j.push_back({{"gamma", t.gamma}, {"multi_index", t.index}});
    return j;
}

inline DifferentialOperator operator_from(const json &j) {
    if (!j.is_array()) throw DataError("operator must be a list of {gamma, multi_index} terms");
    std::vector<DifferentialOperator::Term> terms;
    for (const auto &t : j) terms.push_back({t.value("gamma", 1.0), t.at("multi_index").get<MultiIndex>()});
    return DifferentialOperator(std::move(terms));
}

inline json to_json(const CompactBox &b) { return {{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}}; }

inline CompactBox box_from(const json &j) {
    CompactBox b{vector_from(j.at("lower")), vector_from(j.at("upper"))};
    if (b.lower.size() != b.upper.size()) throw DataError("box bounds differ in length");
    b.validate();
    return b;
}

inline json to_json(const AnchorFunction &f) { return {{"weights", to_json(f.weights)}, {"centers", to_json(f.centers)}}; }

inline AnchorFunction anchor_from(const json &j) {
    AnchorFunction f;
    f.weights = vector_from(j.at("weights"));
    f.centers = matrix_from(j.at("centers"));
    if (f.centers.rows() != f.weights.size()) throw DataError("anchor needs one center per weight");
    return f;
}

inline json to_json(const ShapeConstraint &c) {
    json j = {{"operator", to_json(c.op)}, {"domain", to_json(c.domain)}, {"b0", c.b0},
              {"U", to_json(c.U_row)},     {"W", to_json(c.W_row)},       {"label", c.label}};
    if (!c.f0.is_zero()) j["f0"] = to_json(c.f0);
    return j;
}

inline ShapeConstraint constraint_from(const json &j) {
    ShapeConstraint c;
    c.op = operator_from(j.at("operator"));
    c.domain = box_from(j.at("domain"));
    c.b0 = j.value("b0", 0.0);
    c.U_row = vector_from(j.at("U"));
    c.W_row = vector_from(j.at("W"));
    c.label = j.value("label", std::string());
    if (j.contains("f0")) c.f0 = anchor_from(j.at("f0"));
    return c;
}

inline json to_json(const BiasSet &b) {
    switch (b.kind) {
        case BiasSet::Kind::Free: return {{"kind", "free"}};
        case BiasSet::Kind::Zero: return {{"kind", "zero"}};
        case BiasSet::Kind::Box: return {{"kind", "box"}, {"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}};
    }
    return {};
}

inline BiasSet bias_from(const json &j) {
    const auto kind = j.value("kind", std::string("free"));
    if (kind == "free") return BiasSet::free();
    if (kind == "zero") return BiasSet::zero();
    if (kind == "box") return BiasSet::box(vector_from(j.at("lower")), vector_from(j.at("upper")));
    throw DataError("unknown bias kind '" + kind + "'");
}

inline json to_json(const ConstraintSystem &s) {
    json items = json::array();
    for (const auto &c : s.constraints) items.push_back(to_json(c));
    return {{"Q", s.Q}, {"P", s.P}, {"bias", to_json(s.bias)}, {"constraints", items}};
}

inline ConstraintSystem system_from(const json &j) {
    ConstraintSystem s;
    s.Q = j.value("Q", 1);
    s.P = j.value("P", 1);
    if (j.contains("bias")) s.bias = bias_from(j.at("bias"));
    for (const auto &c : j.value("constraints", json::array())) s.constraints.push_back(constraint_from(c));
    s.validate();
    return s;
}

inline json to_json(const Covering &c) {
    json nets = json::array();
    for (int i = 0; i < c.num_constraints(); ++i) {
        nets.push_back({{"centers", to_json(c.nets[i].centers)},
                        {"radii", to_json(c.nets[i].radii)},
                        {"eta", to_json(c.eta[i])}});
    }
    return {{"norm", c.norm == Norm::L2 ? "l2" : "linf"}, {"nets", nets}};
}

inline Norm norm_from(const std::string &s) {
    if (s == "l2") return Norm::L2;
    if (s == "linf") return Norm::Linf;
    throw DataError("unknown norm '" + s + "'");
}

inline Covering covering_from(const json &j) {
    Covering c;
    c.norm = norm_from(j.value("norm", std::string("l2")));
    for (const auto &n : j.at("nets")) {
        Net net;
        net.centers = matrix_from(n.at("centers"));
        net.radii = vector_from(n.at("radii"));
        c.nets.push_back(std::move(net));
        c.eta.push_back(vector_from(n.at("eta")));
    }
    return c;
}

inline json to_json(const ObjectiveSpec &o) {
    return {{"loss", o.loss == Loss::SquaredError ? "squared" : "pinball"},
            {"levels", o.levels},
            {"regularization", o.regularization == Regularization::Ridge ? "ridge" : "norm_ball"},
            {"lambda_f", o.lambda_f},
            {"lambda_b", o.lambda_b},
            {"intercept", o.intercept}};
}

inline ObjectiveSpec objective_from(const json &j) {
    ObjectiveSpec o;
    const auto loss = j.value("loss", std::string("squared"));
    if (loss == "squared") {
        o.loss = Loss::SquaredError;
    } else if (loss == "pinball") {
        o.loss = Loss::Pinball;
        o.intercept = true;
    } else {
        throw DataError("unknown loss '" + loss + "'");
    }
    o.levels = j.value("levels", std::vector<double>{});
    const auto reg = j.value("regularization", std::string("ridge"));
    if (reg == "ridge") {
        o.regularization = Regularization::Ridge;
    } else if (reg == "norm_ball") {
        o.regularization = Regularization::NormBall;
    } else {
        throw DataError("unknown regularization '" + reg + "'");
    }
    o.lambda_f = j.value("lambda_f", o.lambda_f);
    o.lambda_b = j.value("lambda_b", o.lambda_b);
    o.intercept = j.value("intercept", o.intercept);
    return o;
}

inline const char *to_string(Mode m) { return m == Mode::Tightened ? "tightened" : "discretized"; }

inline Mode mode_from(const std::string &s) {
    if (s == "tightened") return Mode::Tightened;
    if (s == "discretized") return Mode::Discretized;
    throw DataError("unknown mode '" + s + "'");
}

inline json to_json(const socp::SolveReport &r) {
    return {{"status", socp::to_string(r.status)},
            {"method", r.method},
            {"iterations", r.iterations},
            {"objective", r.objective},
            {"primal_residual", r.primal_residual},
            {"dual_residual", r.dual_residual},
            {"gap", r.gap}};
}

inline socp::Status status_from(const std::string &s) {
    for (auto st : {socp::Status::Optimal, socp::Status::Infeasible, socp::Status::Unbounded, socp::Status::MaxIter}) {
        if (s == socp::to_string(st)) return st;
    }
    throw DataError("unknown solver status '" + s + "'");
}

// ---- checksums ----------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string checksum(const json &j) { return hex(fnv1a(j.dump())); }

// ---- models -------------------------------------------------------------------

/// Affine input map x_model = (x - shift) / scale applied before the model.
struct Standardization {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    [[nodiscard]] bool active() const { return shift.size() > 0; }

    [[nodiscard]] PointSet apply(const PointSet &X) const {
        if (!active()) return X;
        PointSet out = X;
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            out.row(r) = (X.row(r) - shift.transpose()).cwiseQuotient(scale.transpose());
        }
        return out;
    }
};

/// A fitted model together with the input map and provenance checksums.
struct ModelFile {
    FittedModel model;
    Standardization standardization;
    std::vector<std::string> feature_names;
    std::string target_name;
    json provenance = json::object();
};

inline json to_json(const FittedModel &m) {
    return {{"kernel", to_json(m.kernel)},
            {"objective", to_json(m.objective)},
            {"mode", to_string(m.mode)},
            {"system", to_json(m.system)},
            {"covering", to_json(m.covering)},
            {"samples", to_json(m.samples)},
            {"coefficients", to_json(m.coef)},
            {"bias", to_json(m.bias)},
            {"norms", to_json(m.norms)},
            {"value", m.value},
            {"conic_objective", m.conic_objective},
            {"loss", m.loss},
            {"solver", to_json(m.report)}};
}

inline FittedModel model_from(const json &j) {
    FittedModel m;
    m.kernel = kernel_from(j.at("kernel"));
    m.objective = objective_from(j.at("objective"));
    m.mode = mode_from(j.at("mode").get<std::string>());
    m.system = system_from(j.at("system"));
    m.covering = covering_from(j.at("covering"));
    m.samples = matrix_from(j.at("samples"));
    m.coef = matrix_from(j.at("coefficients"), m.system.Q);
    m.bias = vector_from(j.at("bias"));
    m.norms = vector_from(j.at("norms"));
    m.value = j.at("value").get<double>();
    m.conic_objective = j.at("conic_objective").get<double>();
    m.loss = j.at("loss").get<double>();
    const auto &s = j.at("solver");
    m.report.status = status_from(s.at("status").get<std::string>());
    m.report.method = s.value("method", std::string());
    m.report.iterations = s.value("iterations", 0);
    m.report.objective = number_or(s, "objective", m.conic_objective);
    m.report.primal_residual = number_or(s, "primal_residual", 0.0);
    m.report.dual_residual = number_or(s, "dual_residual", 0.0);
    m.report.gap = number_or(s, "gap", 0.0);

    for (const auto &c : m.system.constraints) {
        if (!c.f0.is_zero()) m.anchors.push_back(c.f0);
    }
    m.layout.I = static_cast<int>(m.anchors.size());
    m.layout.N = static_cast<int>(m.samples.rows());
    for (int i = 0; i < m.covering.num_constraints(); ++i) {
        m.layout.center_offset.push_back(m.covering.offset(i));
        m.layout.center_count.push_back(m.covering.nets[i].size());
    }
    if (m.covering.num_constraints() != m.system.size()) throw DataError("covering does not match the constraints");
    if (m.coef.rows() != m.layout.size()) throw DataError("coefficient count does not match the generators");
    return m;
}

inline json to_json(const ModelFile &f) {
    json j = {{"format", "shapekern-model"}, {"version", 1}, {"model", to_json(f.model)}, {"provenance", f.provenance}};
    j["features"] = f.feature_names;
    j["target"] = f.target_name;
    if (f.standardization.active()) {
        j["standardization"] = {{"shift", to_json(f.standardization.shift)}, {"scale", to_json(f.standardization.scale)}};
    }
    return j;
}

inline ModelFile model_file_from(const json &j) {
    if (!j.is_object() || j.value("format", std::string()) != "shapekern-model") throw DataError("not a model file");
    ModelFile f;
    try {
        f.model = model_from(j.at("model"));
        f.provenance = j.value("provenance", json::object());
        f.feature_names = j.value("features", std::vector<std::string>{});
        f.target_name = j.value("target", std::string());
        if (j.contains("standardization")) {
            f.standardization.shift = vector_from(j["standardization"].at("shift"));
            f.standardization.scale = vector_from(j["standardization"].at("scale"));
        }
    } catch (const json::exception &e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    return f;
}

inline json to_json(const ViolationReport &r) {
    json items = json::array();
    for (const auto &c : r.constraints) {
        items.push_back({{"index", c.index},
                         {"label", c.label},
                         {"worst_gap", c.worst_gap},
                         {"worst_point", to_json(c.worst_point)},
                         {"proportion_violated", c.proportion_violated},
                         {"integrated_violation", c.integrated_violation}});
    }
    return {{"grid_resolution", r.grid_resolution}, {"constraints", items}};
}

// ---- files --------------------------------------------------------------------

inline json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

// ---- CSV ----------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    [[nodiscard]] int column(const std::string &name) const {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (header[k] == name) return static_cast<int>(k);
        }
        throw DataError("no column named '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto &s : out) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    }
    return out;
}

/// Headered numeric CSV with '.' decimals.
inline Table read_csv(std::istream &in) {
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (lineno == 0 || line.find_first_not_of(" \t\r") == std::string::npos) throw DataError("empty CSV");
    t.header = split_csv_line(line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) {
            throw DataError("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()),
                            lineno);
        }
        std::vector<double> row;
        for (const auto &c : cells) {
            double v = 0.0;
            const char *first = c.data();
            if (!c.empty() && c[0] == '+') ++first;
            const auto res = std::from_chars(first, c.data() + c.size(), v);
            if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw DataError("cannot parse '" + c + "' as a number", lineno);
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
    }
    return t;
}

inline Table read_csv_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return read_csv(in);
    } catch (const DataError &e) {
        throw DataError(path + ": " + e.what());
    }
}

// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream &out, const std::vector<std::string> &header, const Eigen::MatrixXd &values) {
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << "\n";
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << format_double(values(r, k));
        out << "\n";
    }
}

}  // namespace shapekern::io
