// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fd_oracle.hpp"
#include "lp_oracle.hpp"
#include "shapekern/datasets.hpp"
#include "shapekern/socp.hpp"
#include "shapekern/verify.hpp"

using namespace shapekern;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ConstraintSystem increasing_on(double lo, double hi) {
    ConstraintSystem s;
    s.constraints.push_back(monotone_increasing(0, CompactBox::interval(lo, hi)));
    s.bias = BiasSet::zero();
    return s;
}

ConstraintSystem no_constraints() {
    ConstraintSystem s;
    s.bias = BiasSet::zero();
    return s;
}

// Monotone quadratic replication setup.
const KernelSpec kSpec = KernelSpec::gaussian(0.5);
const ObjectiveSpec kRidge = ObjectiveSpec::ridge(1e-4);

void hard_constraints(Outcome &out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = increasing_on(0, 2);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 25; ++k) {
        const auto spec = KernelSpec::gaussian(k % 2 ? 1.0 : 0.5);
        const int M = (k / 2) % 2 ? 20 : 10;
        const auto data = quadratic_dataset(30, 0.5 + 0.25 * (k % 7), 100 + k);
        const auto cov = anchored_grid_covering(sys, spec, M, Norm::L2);
        const auto m = fit(data, kRidge, sys, cov, spec, Mode::Tightened);
        worst = std::min(worst, check_constraints(m, sys, 10000).worst_gap());
    }
    const double t = seconds_since(t0);
    out.detail << "25 tightened fits, worst gap " << worst << ", " << t << " s";
    out.require(worst >= -1e-6, "worst gap >= -1e-6");
    out.require(t < 60, "runtime < 60 s");
}

void sandwich(Outcome &out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = increasing_on(0, 2);
    double worst_sandwich = -1e300, worst_disc = -1e300, worst_eta = -1e300;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto data = quadratic_dataset(30, 1.0, seed);
        double prev_eta = std::numeric_limits<double>::infinity(), prev_disc = -std::numeric_limits<double>::infinity();
        for (int M : {5, 10, 20, 40, 80}) {
            const auto cov = anchored_grid_covering(sys, kSpec, M, Norm::L2);
            const double ve = fit(data, kRidge, sys, cov, kSpec, Mode::Tightened).value;
            const double vd = fit(data, kRidge, sys, cov, kSpec, Mode::Discretized).value;
            worst_sandwich = std::max(worst_sandwich, vd - ve);
            worst_disc = std::max(worst_disc, prev_disc - vd);
            worst_eta = std::max(worst_eta, ve - prev_eta);
            if (seed == 1) out.detail << "M=" << M << " v_eta=" << ve << " v_disc=" << vd << "; ";
            prev_eta = ve;
            prev_disc = vd;
        }
    }
    const double t = seconds_since(t0);
    out.detail << "3 seeds, max(v_disc - v_eta) " << worst_sandwich << ", max v_disc drop " << worst_disc
               << ", max v_eta rise " << worst_eta << ", " << t << " s";
    out.require(worst_sandwich <= 1e-6, "v_disc <= v_eta");
    out.require(worst_disc <= 1e-6, "v_disc non-decreasing");
    out.require(worst_eta <= 1e-6, "v_eta non-increasing");
    out.require(t < 120, "runtime < 2 min");
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void replication(Outcome &out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = increasing_on(0, 2);
    double tight_worst = 0.0;
    int positive = 0;
    std::vector<double> med_prop, med_amount;
    for (double xi : {0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> props, amounts;
        for (int s = 0; s < 100; ++s) {
            const auto data = quadratic_dataset(30, xi, 1000 + s);
            const auto free_fit = fit(data, kRidge, no_constraints(), Covering{}, kSpec, Mode::Discretized);
            const auto mu = monotonicity_metrics(free_fit, 0, 2, 2001);
            props.push_back(mu.proportion);
            amounts.push_back(mu.amount);
            if (xi == 1.0) {
                if (mu.proportion > 0 && mu.amount > 0) ++positive;
                const auto cov = anchored_grid_covering(sys, kSpec, 40, Norm::L2);
                const auto m = fit(data, kRidge, sys, cov, kSpec, Mode::Tightened);
                const auto mt = monotonicity_metrics(m, 0, 2, 2001);
                tight_worst = std::max({tight_worst, mt.proportion, mt.amount});
            }
        }
        med_prop.push_back(median(props));
        med_amount.push_back(median(amounts));
    }
    const double t = seconds_since(t0);
    out.detail << "tightened worst metric " << tight_worst << ", unconstrained violating " << positive
               << "/100, median (proportion, amount) over xi 0.5..4:";
    for (std::size_t k = 0; k < med_prop.size(); ++k) out.detail << " (" << med_prop[k] << ", " << med_amount[k] << ")";
    out.detail << ", " << t << " s";
    out.require(tight_worst <= 1e-6, "tightened metrics 0");
    out.require(positive >= 80, "unconstrained violation in >= 80% of seeds");
    bool monotone = true;
    for (std::size_t k = 1; k < med_prop.size(); ++k) {
        monotone = monotone && med_prop[k] >= med_prop[k - 1] && med_amount[k] >= med_amount[k - 1];
    }
    out.require(monotone, "median violation non-decreasing in xi");
    out.require(t < 300, "runtime < 5 min");
}

void eta_closed_form(Outcome &out) {
    double worst = 0.0;
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, 0.7);
    for (double sigma : {0.5, 1.0, 2.0}) {
        const auto spec = KernelSpec::gaussian(sigma);
        const double s2 = sigma * sigma;
        for (double delta : {0.01, 0.1, 0.5}) {
            const double e = std::exp(-delta * delta / (2 * s2));
            const double e0 = compute_eta(spec, DifferentialOperator::identity(1), c, delta, Norm::L2);
            const double e1 = compute_eta(spec, DifferentialOperator::partial({1}), c, delta, Norm::L2);
            worst = std::max(worst, std::abs(e0 - std::sqrt(2 * (1 - e))));
            worst = std::max(worst, std::abs(e1 - std::sqrt(2 / s2 - 2 * (1 / s2 - delta * delta / (s2 * s2)) * e)));
        }
    }
    out.detail << "18 cases, max abs error " << worst;
    out.require(worst <= 1e-6, "error <= 1e-6");
}

void aposteriori(Outcome &out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = increasing_on(0, 2);
    double worst_slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
        const auto data = quadratic_dataset(30, 1.0, 500 + k);
        const int M = k % 2 ? 20 : 40;
        const auto cov = anchored_grid_covering(sys, kSpec, M, Norm::L2);
        const auto fe = fit(data, kRidge, sys, cov, kSpec, Mode::Tightened);
        const auto fd = fit(data, kRidge, sys, cov, kSpec, Mode::Discretized);
        const auto ref = brute_force_reference(data, kRidge, sys, kSpec, 400);
        const double bound = aposteriori_bound(fe.value, fd.value, ridge_strong_convexity(kRidge));
        worst_slack = std::min(worst_slack, bound + 1e-6 - rkhs_distance(fe, 0, ref, 0));
    }
    out.detail << "10 instances, min(bound - distance) " << worst_slack << ", " << seconds_since(t0) << " s";
    out.require(worst_slack >= 0.0, "distance <= bound + 1e-6");
}

void solver(Outcome &out) {
    using namespace socp;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    double proj = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int d = 1 + t % 8;
        Eigen::VectorXd u(d), w(d);
        for (int j = 0; j < d; ++j) {
            u[j] = 2 * nd(rng);
            w[j] = 2 * nd(rng);
        }
        const Eigen::VectorXd pu = project_soc(u);
        proj = std::max(proj, (project_soc(pu) - pu).norm());
        proj = std::max(proj, (pu - project_soc(w)).norm() - (u - w).norm());
        proj = std::max(proj, (u - (pu - project_soc(-u))).norm());
    }
    out.detail << "projection defect " << proj;
    out.require(proj <= 1e-10, "projection properties");

    auto program = [](Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::VectorXd b, std::vector<Cone> cones) {
        ConicProgram p;
        p.c = std::move(c);
        p.A = A.sparseView();
        p.b = std::move(b);
        p.cones = std::move(cones);
        return p;
    };
    double examples = 0.0;
    for (auto method : {Method::InteriorPoint, Method::OperatorSplitting}) {
        SolverOptions o;
        o.method = method;
        o.tol = 1e-9;
        const auto lp = solve(program(Eigen::VectorXd::Ones(1), -Eigen::MatrixXd::Ones(1, 1), -Eigen::VectorXd::Ones(1),
                                      {Cone::nonneg(1)}),
                              o);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 1);
        A(0, 0) = -1;
        const auto soc = solve(program(Eigen::VectorXd::Ones(1), A, Eigen::Vector3d(0, 3, 4), {Cone::soc(3)}), o);
        const auto eq = solve(program(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1),
                                      Eigen::VectorXd::Constant(1, 7.0), {Cone::zero(1)}),
                              o);
        for (const auto *r : {&lp, &soc, &eq}) {
            if (r->status != Status::Optimal) examples = std::numeric_limits<double>::infinity();
        }
        examples = std::max({examples, std::abs(lp.primal[0] - 1), std::abs(soc.primal[0] - 5), std::abs(eq.primal[0] - 7)});
    }
    out.detail << ", example error " << examples;
    out.require(examples <= 1e-5, "analytic examples");

    // Both backends; the operator-splitting one through the plain (tol, max_iter) form.
    double lp_err = 0.0;
    int most_iterations = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + (trial * 28) / 19;  // 2 .. 30
        const auto lp = testing_oracle::random_bounded_lp(rng, n, n);
        const double ref = n <= 4 ? testing_oracle::vertex_enumeration(lp.c, lp.G, lp.h)
                                  : testing_oracle::dense_simplex(lp.c, lp.G, lp.h, lp.inside);
        const auto prog = program(lp.c, lp.G, lp.h, {Cone::nonneg(static_cast<int>(lp.h.size()))});
        SolverOptions ipm;
        ipm.method = Method::InteriorPoint;
        ipm.tol = 1e-9;
        for (const auto &rep : {solve(prog, 1e-9, 1000000), solve(prog, ipm)}) {
            const double err = rep.status == Status::Optimal ? std::abs(rep.objective - ref) / std::max(1.0, std::abs(ref))
                                                             : std::numeric_limits<double>::infinity();
            lp_err = std::max(lp_err, err);
            if (rep.method == "admm") most_iterations = std::max(most_iterations, rep.iterations);
        }
    }
    out.detail << ", 20 LPs (n 2..30) max relative error " << lp_err << " (operator splitting needed up to "
               << most_iterations << " iterations)";
    out.require(lp_err <= 1e-5, "random LPs");
}

void derivative_gram(Outcome &out) {
    const std::vector<MultiIndex> ops = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(-1.5, 1.5);
    double worst = 0.0;
    int cases = 0;
    auto run = [&](const KernelSpec &spec, const testing_oracle::Kernel &plain, double scale, double length) {
        for (const auto &rx : ops) {
            for (const auto &ry : ops) {
                for (int t = 0; t < 100; ++t) {
                    Eigen::VectorXd x(2), y(2);
                    for (int j = 0; j < 2; ++j) {
                        x[j] = ud(rng) * scale;
                        y[j] = ud(rng) * scale;
                    }
                    const double exact =
                        eval_derivative_kernel(spec, DifferentialOperator::partial(rx), DifferentialOperator::partial(ry), x, y);
                    const double fd = testing_oracle::fd_mixed(plain, rx, ry, x, y, length);
                    const int order = testing_oracle::order_of(rx) + testing_oracle::order_of(ry);
                    // Values near zero are compared against the operator's natural scale.
                    const double ref = std::max(std::abs(exact), 1e-3 / std::pow(scale, order));
                    worst = std::max(worst, std::abs(exact - fd) / ref);
                    ++cases;
                }
            }
        }
    };
    for (double sigma : {0.5, 1.0, 2.0}) run(KernelSpec::gaussian(sigma), testing_oracle::plain_gaussian(sigma), sigma, sigma);
    run(KernelSpec::polynomial(4, 0.5, 2), testing_oracle::plain_polynomial(4, 0.5), 1.0, 5.0);
    out.detail << cases << " evaluations, max relative error " << worst;
    out.require(worst <= 1e-5, "relative error <= 1e-5");
}

void quantiles(Outcome &out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = heteroscedastic_dataset(300, 7);
    const auto test = heteroscedastic_dataset(10000, 8);
    const std::vector<double> tau{0.1, 0.3, 0.5, 0.7, 0.9};
    const auto box = CompactBox::interval(data.X.minCoeff(), data.X.maxCoeff());
    const auto sys = non_crossing_system(5, box);
    const auto spec = KernelSpec::gaussian(0.2);
    const auto obj = ObjectiveSpec::pinball(tau, Regularization::NormBall, 3.0, 10 * data.y.cwiseAbs().maxCoeff());
    const auto cov = uniform_covering(sys, spec, 0.5 * box.widths()[0] / 20, Norm::L2);
    const auto m = fit(data, obj, sys, cov, spec, Mode::Tightened);

    PointSet grid(1000, 1);
    for (int k = 0; k < 1000; ++k) grid(k, 0) = box.lower[0] + box.widths()[0] * k / 999;
    const Eigen::MatrixXd g = predict(m, DifferentialOperator::identity(1), grid);
    double margin = std::numeric_limits<double>::infinity();
    for (int q = 0; q + 1 < 5; ++q) margin = std::min(margin, (g.col(q + 1) - g.col(q)).minCoeff());
    const Eigen::MatrixXd p = predict(m, DifferentialOperator::identity(1), test.X);
    double worst_cover = 0.0;
    out.detail << "coverage";
    for (int q = 0; q < 5; ++q) {
        const double cover = (test.y.array() <= p.col(q).array()).cast<double>().mean();
        out.detail << " " << cover;
        worst_cover = std::max(worst_cover, std::abs(cover - tau[q]));
    }
    const double t = seconds_since(t0);
    out.detail << ", min crossing margin " << margin << ", " << t << " s";
    out.require(margin >= -1e-6, "non-crossing");
    out.require(worst_cover <= 0.08, "coverage within 0.08");
    out.require(t < 180, "runtime < 3 min");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome &)>>> criteria = {
        {"hard-constraint certification", hard_constraints},
        {"sandwich and refinement", sandwich},
        {"monotone quadratic replication", replication},
        {"eta closed form", eta_closed_form},
        {"a-posteriori bound validity", aposteriori},
        {"solver correctness", solver},
        {"derivative Gram correctness", derivative_gram},
        {"quantile non-crossing", quantiles},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            criteria[k].second(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
