#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "shapekern/cli.hpp"

namespace sk = shapekern;
namespace cli = shapekern::cli;
namespace io = shapekern::io;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

std::string dir_of(const std::string &path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

void emit(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        io::write_text_file(path, text);
    }
}

std::string csv_text(const io::Table &t) {
    std::ostringstream os;
    io::write_csv(os, t.header, t.values);
    return os.str();
}

// "axis:order", or just "order" for axis 0.
cli::DerivativeRequest parse_derivative(const std::string &s) {
    cli::DerivativeRequest r;
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) {
            r.order = std::stoi(s);
        } else {
            r.axis = std::stoi(s.substr(0, colon));
            r.order = std::stoi(s.substr(colon + 1));
        }
    } catch (const std::exception &) {
        throw cli::UsageError("bad derivative '" + s + "', expected axis:order");
    }
    return r;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Kernel regression with hard shape constraints"};
    app.require_subcommand(1);

    std::string config_path, model_out, summary_out;
    auto *fit = app.add_subcommand("fit", "fit a model from a JSON run configuration");
    fit->add_option("-c,--config", config_path, "run configuration")->required();
    fit->add_option("-o,--out", model_out, "model JSON")->required();
    fit->add_option("--summary", summary_out, "also write the summary here");

    std::string model_path, grid, points_path, predict_out;
    std::vector<std::string> derivs;
    auto *pred = app.add_subcommand("predict", "evaluate a model on a grid or at CSV points");
    pred->add_option("-m,--model", model_path, "model JSON")->required();
    auto *grid_opt = pred->add_option("--grid", grid, "lo:hi:n per axis, comma separated");
    auto *points_opt = pred->add_option("--points", points_path, "CSV with the feature columns");
    grid_opt->excludes(points_opt);
    pred->add_option("-d,--derivative", derivs, "extra derivative columns, axis:order");
    pred->add_option("-o,--out", predict_out, "output CSV (default stdout)");

    std::string verify_model, verify_config, verify_out, margins_out;
    int grid_points = 10000;
    auto *ver = app.add_subcommand("verify", "check shape constraints on a dense grid");
    ver->add_option("-m,--model", verify_model, "model JSON")->required();
    ver->add_option("-c,--config", verify_config, "take the constraints from this configuration");
    ver->add_option("-n,--grid-points", grid_points, "grid points per axis")->check(CLI::Range(2, 100000000));
    ver->add_option("-o,--out", verify_out, "report JSON (default stdout)");
    ver->add_option("--margins", margins_out, "CSV of per-point margins");

    std::string tight_path, disc_path, bounds_out;
    std::optional<double> mu;
    auto *bnd = app.add_subcommand("bounds", "a-posteriori distance bound between tightened and exact solutions");
    bnd->add_option("--tightened", tight_path, "tightened model JSON")->required();
    bnd->add_option("--discretized", disc_path, "discretized model JSON")->required();
    bnd->add_option("--mu", mu, "strong convexity modulus (default 2 lambda_f)");
    bnd->add_option("-o,--out", bounds_out, "report JSON (default stdout)");

    std::string kind = "quadratic", synth_out;
    int n = 30;
    double xi = 1.0;
    std::uint64_t seed = 0;
    auto *gen = app.add_subcommand("gen-synthetic", "write a synthetic data set as CSV");
    gen->add_option("--kind", kind, "quadratic or heteroscedastic");
    gen->add_option("-n", n, "number of samples");
    gen->add_option("--xi", xi, "noise level of the quadratic data");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("-o,--out", synth_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*fit) {
            const auto cfg = cli::parse_config(io::read_json_file(config_path));
            const auto out = cli::cmd_fit(cfg, dir_of(config_path));
            io::write_text_file(model_out, io::to_json(out.file).dump(1) + "\n");
            if (!summary_out.empty()) io::write_text_file(summary_out, out.summary);
            std::cout << out.summary;
        } else if (*pred) {
            const auto file = io::model_file_from(io::read_json_file(model_path));
            const int d = file.model.dim();
            sk::PointSet pts(0, d);
            if (!grid.empty()) {
                pts = cli::parse_grid(grid, d);
            } else if (!points_path.empty()) {
                const auto t = io::read_csv_file(points_path);
                pts.resize(t.values.rows(), d);
                for (int j = 0; j < d; ++j) {
                    const std::string name = j < static_cast<int>(file.feature_names.size()) ? file.feature_names[j] : "x" + std::to_string(j);
                    pts.col(j) = t.values.col(t.column(name));
                }
            } else {
                throw cli::UsageError("give --grid or --points");
            }
            std::vector<cli::DerivativeRequest> reqs;
            for (const auto &s : derivs) reqs.push_back(parse_derivative(s));
            emit(predict_out, csv_text(cli::cmd_predict(file, pts, reqs)));
        } else if (*ver) {
            const auto file = io::model_file_from(io::read_json_file(verify_model));
            std::optional<cli::RunConfig> cfg;
            if (!verify_config.empty()) cfg = cli::parse_config(io::read_json_file(verify_config));
            const auto out = cli::cmd_verify(file, cfg, grid_points, verify_config.empty() ? "" : dir_of(verify_config));
            emit(verify_out, out.report.dump(1) + "\n");
            if (!margins_out.empty()) io::write_text_file(margins_out, csv_text(out.margins));
        } else if (*bnd) {
            const auto t = io::model_file_from(io::read_json_file(tight_path));
            const auto d = io::model_file_from(io::read_json_file(disc_path));
            emit(bounds_out, cli::cmd_bounds(t, d, mu).dump(1) + "\n");
        } else if (*gen) {
            emit(synth_out, cli::cmd_gen_synthetic(kind, n, xi, seed));
        }
    } catch (const cli::UsageError &e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    } catch (const sk::SolverFailure &e) {
        std::fprintf(stderr, "solver failure: %s (iterations %d, primal residual %.3g, dual residual %.3g)\n", e.what(),
                     e.report.iterations, e.report.primal_residual, e.report.dual_residual);
        return kSolver;
    } catch (const io::DataError &e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kData;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    }
    return kOk;
}
