// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero when any
// criterion fails.
#include "ndslab/bcp.hpp"
#include "ndslab/cli.hpp"
#include "ndslab/config.hpp"
#include "ndslab/rng.hpp"
#include "ndslab/sim.hpp"
#include "ndslab/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace ndslab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string const kModels = NDSLAB_MODELS_DIR;

struct Verdict
{
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, std::string const& what)
    {
        if (!ok)
        {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, char const* title, double limit_seconds,
               std::function<void(Verdict&)> const& body)
{
    Verdict v;
    auto const t0 = std::chrono::steady_clock::now();
    try
    {
        body(v);
    }
    catch (std::exception const& e)
    {
        v.check(false, std::string("exception: ") + e.what());
    }
    double const secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    std::ostringstream budget;
    budget << "runtime " << secs << " s > " << limit_seconds << " s";
    v.check(secs < limit_seconds, budget.str());
    if (!v.pass)
        ++failures;
    std::printf("AC%d %s %s (%.2f s)%s\n", id, v.pass ? "PASS" : "FAIL", title,
                secs, v.detail.str().c_str());
    std::fflush(stdout);
}

std::string cli_capture(std::vector<std::string> args, int& code)
{
    args.insert(args.begin(), "nds-lab");
    std::vector<char const*> argv;
    for (auto const& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return out.str() + err.str();
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Grid search over the N-model's one free activity (xi_12); the other two
// follow from class balance.
double nmodel_grid_rho(double step)
{
    double best = INFINITY;
    for (double x12 = 0; x12 <= 1 + 1e-12; x12 += step)
    {
        double const x11 = 1.2 - x12;       // class 1: xi11 + xi12 = 1.2
        double const x22 = 1.6 / 2;         // class 2 only on pool 2
        if (x11 < 0 || x11 > 1)
            continue;
        double const rho = std::max(x11, x12 + x22);
        best = std::min(best, rho);
    }
    return best;
}

double erlang_c_queue(int servers, double offered)
{
    double term = 1;
    double sum = 0;
    for (int k = 0; k < servers; ++k)
    {
        sum += term;
        term *= offered / (k + 1);
    }
    double const rho = offered / servers;
    double const tail = term / (1 - rho);
    return tail / (sum + tail) * rho / (1 - rho);
}

//---------------------------------------------------------------------------//
void fluid_correctness(Verdict& v)
{
    int code = 0;
    auto const text = cli_capture({"analyze", kModels + "/nmodel.json"}, code);
    v.check(code == 0, "analyze exit code");
    auto const doc = json::parse(text);
    double const tol = 1e-9;
    double const xi_expect[] = {1.0, 0.2, 0.8};
    for (int k = 0; k < 3; ++k)
    {
        v.check(std::abs(doc["xi"][k]["xi"].get<double>() - xi_expect[k]) <= tol,
                "xi");
    }
    v.check(std::abs(doc["rho"].get<double>() - 1) <= tol, "rho");
    v.check(doc["heavy_traffic"].get<bool>(), "HT");
    v.check(doc["resource_pooling"].get<bool>(), "CRP");
    double const r5 = std::sqrt(5.0);
    v.check(std::abs(doc["theta"][0].get<double>() - 2 / r5) <= tol, "theta1");
    v.check(std::abs(doc["theta"][1].get<double>() - 1 / r5) <= tol, "theta2");
    for (int j = 0; j < 2; ++j)
        v.check(std::abs(doc["z"][j].get<double>() - 2 / r5) <= tol, "z");
    double const grid = nmodel_grid_rho(1e-4);
    v.check(std::abs(grid - doc["rho"].get<double>()) <= 1e-3, "grid oracle");
    v.detail << " rho=" << doc["rho"].get<double>() << " grid=" << grid;
}

void skorohod_oracle(Verdict& v)
{
    int const paths = 1000;
    int const T = 1000;
    StreamRng rng(2, stream_id::rbm_base);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> zs(paths), outs(paths);
    long mismatches = 0;
    for (int p = 0; p < paths; ++p)
    {
        auto& z = zs[p];
        z.resize(T);
        z[0] = gauss(rng);
        for (int k = 1; k < T; ++k)
            z[k] = z[k - 1] + gauss(rng) * 0.1 - 0.01;
        outs[p] = skorohod_map(DiscretePath{1e-2, z}).values;
        for (int k = 0; k < T; ++k)
        {
            // sup_{m <= k} (-z[m])^+ by a direct inner loop.
            double push = 0;
            for (int m = 0; m <= k; ++m)
                push = std::max(push, -z[m]);
            if (outs[p][k] != z[k] + push)
                ++mismatches;
        }
    }
    long lipschitz = 0;
    for (int a = 0; a < paths; ++a)
    {
        for (int b = a + 1; b < paths; ++b)
        {
            double dz = 0;
            double dout = 0;
            for (int k = 0; k < T; ++k)
            {
                dz = std::max(dz, std::abs(zs[a][k] - zs[b][k]));
                dout = std::max(dout, std::abs(outs[a][k] - outs[b][k]));
            }
            if (dout > 2 * dz + 1e-12)
                ++lipschitz;
        }
    }
    v.check(mismatches == 0, "single pass differs from double loop");
    v.check(lipschitz == 0, "Lipschitz-2 bound");
    v.detail << " mismatches=" << mismatches << " lipschitz_violations="
             << lipschitz;
}

void rbm_law(Verdict& v)
{
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 1e4;
    p.dt = 1e-2;
    int const reps = 8;
    auto const cost = CostSpec::linear(Eigen::VectorXd::Ones(1));
    auto const check = dt_halving_check(cost, Eigen::VectorXd::Ones(1), p, reps,
                                        2024);
    double const avg = check.coarse.mean / p.horizon;
    double const se = check.coarse.se / p.horizon;
    v.check(std::abs(avg - 0.5) <= 0.03 * 0.5, "time average within 3% of 0.5");
    v.check(std::abs(check.shift) < check.coarse.se, "dt halving shift < 1 SE");
    v.detail << " time_avg=" << avg << " se=" << se
             << " halving_shift/SE=" << check.shift / check.coarse.se;
}

void cost_machinery(Verdict& v)
{
    Eigen::VectorXd const theta = Eigen::Vector2d(2, 1) / std::sqrt(5.0);
    Eigen::VectorXd const c = Eigen::Vector2d(1, 3);
    auto const lin_numeric = CostSpec::custom(
        2, [c](Eigen::VectorXd const& q) { return c.dot(q); });
    auto const quad_numeric = CostSpec::custom(
        2, [c](Eigen::VectorXd const& q) {
            return c(0) * q(0) * q(0) + c(1) * q(1) * q(1);
        });
    double worst = 0;
    for (int k = 0; k < 100; ++k)
    {
        double const a = 0.1 * (k + 1);
        double const lin_exact = std::min(c(0) * a / theta(0), c(1) * a / theta(1));
        double const s = theta(0) * theta(0) / c(0) + theta(1) * theta(1) / c(1);
        double const quad_exact = a * a / s;
        worst = std::max(worst, std::abs(c_star(lin_numeric, theta, a) - lin_exact));
        worst = std::max(worst,
                         std::abs(c_star(quad_numeric, theta, a) - quad_exact));
    }
    v.check(worst <= 1e-6, "numeric vs closed form");

    // Nonconvex C with theta = (1,1)/sqrt2.
    auto const nonconvex = CostSpec::custom(2, [](Eigen::VectorXd const& q) {
        double const s = q(0) + q(1);
        double const d = q(0) - q(1);
        return 2 * s * s - d * d;
    });
    Eigen::VectorXd const diag = Eigen::Vector2d(1, 1) / std::sqrt(2.0);
    double grid_gap = 0;
    double formula_gap = 0;
    for (int k = 0; k <= 50; ++k)
    {
        double const a = 0.1 * k;
        double grid = INFINITY;
        for (int g = 0; g <= 20000; ++g)
        {
            double const t = g / 20000.0;
            Eigen::VectorXd q = Eigen::Vector2d(t, 1 - t) * a * std::sqrt(2.0);
            grid = std::min(grid, nonconvex(q));
        }
        double const numeric = c_star(nonconvex, diag, a);
        grid_gap = std::max(grid_gap, std::abs(numeric - grid));
        formula_gap = std::max(formula_gap, std::abs(numeric - 2 * a * a));
    }
    auto const check = check_cost(nonconvex, diag, 5.0);
    v.check(grid_gap <= 1e-6, "nonconvex C* vs grid oracle");
    v.check(check.reduced_convex, "midpoint convexity");
    v.detail << " closed_form_err=" << worst << " grid_err=" << grid_gap
             << " |C*-2a^2|=" << formula_gap;
}

void simulator_calibration(Verdict& v)
{
    auto const file = parse_model(json::parse(R"({
        "topology": {"classes": 1, "pools": 1, "edges": [[1, 1]]},
        "first_order": {"lambda": 0.8, "nu": 1, "mu_bar": 1}
    })"));
    auto const& model = file.model;
    auto const inst = build_instance(model.params, model.topology, 2500);
    v.check(inst.servers[0] == 50, "N = 50");
    double const expected = erlang_c_queue(50, 40.0);
    BaselinePolicy const policy(PolicyKind::fifo, model.topology);
    auto start = SimState::empty(model.topology);
    start.idle[0] = inst.servers[0];
    int const reps = 50;
    std::vector<double> means;
    for (int r = 0; r < reps; ++r)
    {
        RunOptions opts;
        opts.horizon = 62;
        opts.stats_from = 2;
        opts.seed = 5000 + r;
        means.push_back(
            run_simulation(model, inst, start, policy, opts).stats.mean_queue[0]);
    }
    double m = 0;
    for (double x : means)
        m += x;
    m /= reps;
    double ss = 0;
    for (double x : means)
        ss += (x - m) * (x - m);
    double const se = std::sqrt(ss / (reps - 1) / reps);
    v.check(std::abs(m - expected) <= 3 * se, "within 3 SE of Erlang C");
    v.detail << " mean_Q=" << m << " erlang_c=" << expected << " se=" << se;
}

StudyConfig shipped_study(char const* name, fs::path const& out)
{
    auto config = load_study_config(kModels + "/" + name);
    config.out = out;
    return config;
}

void structural_invariants(Verdict& v)
{
    auto config = shipped_study("nmodel-study.json", "ac6-debug");
    config.n = {1000};
    config.debug = true;
    config.policies = {PolicyKind::tracking, PolicyKind::greedy,
                       PolicyKind::random, PolicyKind::fifo};
    config.lb_reps = 2;
    auto const file = load_model_file(config.model_file);
    auto const report = run_convergence_study(config, file);
    auto const& c = report.counters;
    v.check(c.events >= 1000000, "at least 1e6 events");
    v.check(c.state_violations == 0, "state violations");
    v.check(c.policy_violations == 0, "work-conservation violations");
    v.check(c.flow_balance_failures == 0, "flow balance");
    v.detail << " events=" << c.events << " state=" << c.state_violations
             << " policy=" << c.policy_violations
             << " flow=" << c.flow_balance_failures;
}

StudyReport linear_report;
StudyReport quadratic_report;
bool studies_ran = false;

void run_default_studies()
{
    if (studies_ran)
        return;
    studies_ran = true;
    auto config = shipped_study("nmodel-study.json", "ac-linear");
    config.policies = {PolicyKind::tracking, PolicyKind::greedy,
                       PolicyKind::random, PolicyKind::fifo};
    auto const file = load_model_file(config.model_file);
    linear_report = run_convergence_study(config, file);
    write_study_outputs(linear_report, config, file);

    auto qconfig = shipped_study("nmodel-quadratic-study.json", "ac-quadratic");
    auto const qfile = load_model_file(qconfig.model_file);
    quadratic_report = run_convergence_study(qconfig, qfile);
    write_study_outputs(quadratic_report, qconfig, qfile);
}

void state_space_collapse(Verdict& v)
{
    run_default_studies();
    int seen = 0;
    for (auto const& t : linear_report.trends)
    {
        if (t.policy != PolicyKind::tracking)
            continue;
        ++seen;
        v.check(t.decreasing, t.metric + " " + std::to_string(t.n_from) + "->"
                                  + std::to_string(t.n_to));
        v.detail << ' ' << t.metric << '[' << t.n_from << "->" << t.n_to
                 << "]=" << t.median_from << "->" << t.median_to
                 << " p=" << t.test.p_value;
    }
    v.check(seen == 4, "trend rows for both metrics and both steps");
}

void lower_bound_optimality(Verdict& v)
{
    run_default_studies();
    auto below_bound = [&v](StudyReport const& r, char const* tag) {
        for (auto const& s : r.summary)
        {
            double const pooled = std::hypot(s.cost_se, r.lower_bound.se);
            bool const ok = s.cost_mean >= r.lower_bound.mean - 3 * pooled;
            v.check(ok, std::string(tag) + " " + to_string(s.policy) + " n="
                            + std::to_string(s.n) + " below bound");
        }
    };
    below_bound(linear_report, "linear");
    below_bound(quadratic_report, "quadratic");

    std::vector<double> ratios;
    for (auto const& s : linear_report.summary)
    {
        if (s.policy == PolicyKind::tracking)
            ratios.push_back(s.ratio);
    }
    v.detail << " linear_tracking_ratios=";
    for (double r : ratios)
        v.detail << r << ' ';
    for (std::size_t k = 0; k + 1 < ratios.size(); ++k)
        v.check(ratios[k + 1] < ratios[k], "tracking ratio decreasing");
    v.check(!ratios.empty() && ratios.back() <= 1.25, "ratio <= 1.25 at 1e4");

    bool compared = false;
    for (auto const& c : quadratic_report.comparisons)
    {
        if (c.baseline != PolicyKind::greedy || c.n != 10000)
            continue;
        compared = true;
        v.check(c.ratio_baseline > c.ratio_tracking, "greedy ratio > tracking");
        v.check(c.test.p_value < 0.05, "paired sign test");
        v.detail << "quadratic_n1e4 greedy=" << c.ratio_baseline
                 << " tracking=" << c.ratio_tracking << " tracking_cheaper="
                 << c.test.decreases << '/'
                 << c.test.decreases + c.test.increases
                 << " p=" << c.test.p_value;
    }
    v.check(compared, "quadratic greedy comparison at n = 1e4");
}

void determinism(Verdict& v)
{
    fs::remove_all("ac9");
    fs::create_directories("ac9");
    json cfg = read_json_file(kModels + "/nmodel-study.json");
    cfg["model"] = kModels + "/nmodel.json";
    cfg["n"] = {100, 1000};
    cfg["reps"] = 4;
    cfg["policies"] = {"tracking", "greedy", "random", "fifo"};
    cfg["lower_bound"] = {{"reps", 50}, {"seed", 3}};
    for (char const* run : {"a", "b"})
    {
        cfg["out"] = std::string("study-") + run;
        std::ofstream(fs::path("ac9") / (std::string(run) + ".json"))
            << cfg.dump();
    }
    int code = 0;
    std::vector<std::pair<std::string, std::string>> outputs;
    for (char const* run : {"a", "b"})
    {
        std::string const r = run;
        std::string study_out = cli_capture(
            {"study", "ac9/" + r + ".json", "--threads", r == "a" ? "1" : "2"},
            code);
        // The runs write to different directories; drop the path line.
        study_out = study_out.substr(0, study_out.rfind("Outputs in"));
        v.check(code == 0, "study exit");
        cli_capture({"simulate", kModels + "/nmodel-quadratic.json", "--n",
                     "400", "--u", "2", "--reps", "2", "--seed", "9",
                     "--policy", "random", "--out", "ac9/sim-" + r},
                    code);
        v.check(code == 0, "simulate exit");
        std::string const bcp
            = cli_capture({"bcp", kModels + "/nmodel.json", "--u", "5",
                           "--reps", "50", "--seed", "4"},
                          code);
        v.check(code == 0, "bcp exit");
        outputs.emplace_back(study_out, bcp);
    }
    v.check(outputs[0] == outputs[1], "stdout differs");
    int files = 0;
    for (auto const& entry : fs::directory_iterator("ac9/study-a"))
    {
        auto const name = entry.path().filename();
        v.check(slurp(entry.path()) == slurp(fs::path("ac9/study-b") / name),
                name.string());
        ++files;
    }
    for (auto const& entry : fs::directory_iterator("ac9/sim-a"))
    {
        auto const name = entry.path().filename();
        v.check(slurp(entry.path()) == slurp(fs::path("ac9/sim-b") / name),
                name.string());
        ++files;
    }
    v.detail << " files_compared=" << files;
}

}  // namespace

int main()
{
    criterion(1, "fluid correctness on the N-model", 1.0, fluid_correctness);
    criterion(2, "reflection map equals double-loop oracle", 10.0,
              skorohod_oracle);
    criterion(3, "reflected Brownian motion stationary mean", 30.0, rbm_law);
    criterion(4, "reduced-cost machinery", 5.0, cost_machinery);
    criterion(5, "M/M/N calibration against Erlang C", 120.0,
              simulator_calibration);
    criterion(6, "structural invariants in a debug study at n = 1e3", 600.0,
              structural_invariants);
    criterion(7, "state-space collapse trends", 1200.0, state_space_collapse);
    criterion(8, "lower bound and asymptotic optimality", 1800.0,
              lower_bound_optimality);
    criterion(9, "byte-identical reruns", 600.0, determinism);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
