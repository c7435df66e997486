// SPDX-License-Identifier: Apache-2.0
#include "ndslab/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace ndslab
{
namespace
{
using nlohmann::json;

double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

// P(Binomial(m, 1/2) >= k)
double binomial_upper_tail(int m, int k)
{
    if (k <= 0)
        return 1.0;
    if (k > m)
        return 0.0;
    double tail = 0;
    for (int j = k; j <= m; ++j)
    {
        double const log_term = std::lgamma(m + 1.0) - std::lgamma(j + 1.0)
                                - std::lgamma(m - j + 1.0)
                                - m * std::log(2.0);
        tail += std::exp(log_term);
    }
    return std::min(1.0, tail);
}

std::vector<double> column(std::vector<Cell> const& cells, PolicyKind policy,
                           long n, double Cell::*field)
{
    std::vector<std::pair<int, double>> rows;
    for (auto const& c : cells)
    {
        if (c.policy == policy && c.n == n)
            rows.emplace_back(c.rep, c.*field);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto const& r : rows)
        out.push_back(r.second);
    return out;
}

void write_text(std::filesystem::path const& file, std::string const& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + file.string() + "'");
    out << text;
}

json lower_bound_json(LowerBoundEstimate const& lb)
{
    return {{"mean", lb.mean}, {"sd", lb.sd},       {"se", lb.se},
            {"q05", lb.q05},   {"q50", lb.q50},     {"q95", lb.q95},
            {"reps", lb.reps}, {"horizon", lb.horizon}, {"dt", lb.dt}};
}

LowerBoundEstimate lower_bound_from_json(json const& j)
{
    LowerBoundEstimate lb;
    lb.mean = j.at("mean").get<double>();
    lb.sd = j.at("sd").get<double>();
    lb.se = j.at("se").get<double>();
    lb.q05 = j.at("q05").get<double>();
    lb.q50 = j.at("q50").get<double>();
    lb.q95 = j.at("q95").get<double>();
    lb.reps = j.at("reps").get<int>();
    lb.horizon = j.at("horizon").get<double>();
    lb.dt = j.at("dt").get<double>();
    return lb;
}

std::string cells_csv(std::vector<Cell> const& cells)
{
    std::ostringstream os;
    os << "policy,n,rep,seed,cost,ssc_gap_sup,b_hat_sup,theta_q_mean\n";
    for (auto const& c : cells)
    {
        os << to_string(c.policy) << ',' << c.n << ',' << c.rep << ','
           << c.seed << ',' << format_number(c.cost) << ','
           << format_number(c.ssc_gap_sup) << ','
           << format_number(c.b_hat_sup) << ','
           << format_number(c.theta_q_mean) << '\n';
    }
    return os.str();
}

std::vector<Cell> parse_cells_csv(std::filesystem::path const& file)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot open '" + file.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("policy,n,rep,seed,cost", 0) != 0)
        throw ConfigError("'" + file.string() + "' is not a cells table");
    std::vector<Cell> cells;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ','))
            f.push_back(item);
        if (f.size() != 8)
            throw ConfigError("malformed row in '" + file.string() + "'");
        Cell c;
        try
        {
            c.policy = parse_policy_kind(f[0]);
            c.n = std::stol(f[1]);
            c.rep = std::stoi(f[2]);
            c.seed = std::stoull(f[3]);
            c.cost = std::stod(f[4]);
            c.ssc_gap_sup = std::stod(f[5]);
            c.b_hat_sup = std::stod(f[6]);
            c.theta_q_mean = std::stod(f[7]);
        }
        catch (std::logic_error const&)
        {
            throw ConfigError("malformed number in '" + file.string() + "'");
        }
        cells.push_back(c);
    }
    return cells;
}

void check_preconditions(ModelFile const& file, FluidSolution const& fluid)
{
    if (!fluid.ready())
    {
        std::ostringstream os;
        os << "model '" << file.model.name << "' fails the fluid checks:"
           << " heavy traffic " << (fluid.basic.heavy_traffic ? "yes" : "no")
           << ", resource pooling "
           << (fluid.basic.resource_pooling ? "yes" : "no") << ", tree "
           << (fluid.basic.tree ? "yes" : "no");
        for (auto const& note : fluid.basic.notes)
            os << "\n  " << note;
        throw ModelError(os.str());
    }
    auto const check = check_cost(file.cost, fluid.theta, 10.0);
    if (!check.ok())
    {
        throw ModelError("cost '" + file.cost.label()
                         + "' fails the reduced-cost checks (monotone, "
                           "nonnegative, convex)");
    }
}

// Everything that depends on (policy, n) but not on the replication.
struct CellSetup
{
    PolicyKind policy = PolicyKind::tracking;
    SystemInstance instance;
    SimState start;
    std::unique_ptr<Policy> rule;
    std::unique_ptr<PerturbedMinimizer> minimizer;
    Diagnostics diagnostics;
};

}  // namespace

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

StudyConfig parse_study_config(nlohmann::json const& doc,
                               std::filesystem::path const& base_dir)
{
    try
    {
        StudyConfig cfg;
        if (!doc.contains("model"))
            throw ConfigError("study config needs 'model'");
        cfg.model_file = base_dir / doc.at("model").get<std::string>();
        if (!doc.contains("n") || !doc.at("n").is_array()
            || doc.at("n").empty())
        {
            throw ConfigError("study config needs a non-empty 'n' schedule");
        }
        for (auto const& v : doc.at("n"))
            cfg.n.push_back(v.get<long>());
        for (std::size_t k = 0; k < cfg.n.size(); ++k)
        {
            if (cfg.n[k] < 1)
                throw ConfigError("n values must be positive");
            if (k > 0 && cfg.n[k] <= cfg.n[k - 1])
                throw ConfigError("n schedule must be strictly increasing");
        }
        cfg.horizon = doc.value("horizon", cfg.horizon);
        if (!(cfg.horizon > 0))
            throw ConfigError("horizon must be positive");
        cfg.reps = doc.value("reps", cfg.reps);
        if (cfg.reps < 2)
            throw ConfigError("reps must be at least 2");
        if (doc.contains("policies"))
        {
            cfg.policies.clear();
            for (auto const& p : doc.at("policies"))
                cfg.policies.push_back(parse_policy_kind(p.get<std::string>()));
            if (cfg.policies.empty())
                throw ConfigError("policies must not be empty");
        }
        if (doc.contains("kappa_exponent"))
            cfg.kappa_exponent = doc.at("kappa_exponent").get<double>();
        if (doc.contains("kappa_bar_exponent"))
            cfg.kappa_bar_exponent = doc.at("kappa_bar_exponent").get<double>();
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.out = base_dir / doc.value("out", cfg.out.string());
        json const lb = doc.value("lower_bound", json::object());
        cfg.lb_reps = lb.value("reps", cfg.lb_reps);
        cfg.lb_dt = lb.value("dt", cfg.lb_dt);
        cfg.lb_seed = lb.value("seed", cfg.lb_seed);
        if (cfg.lb_reps < 2)
            throw ConfigError("lower_bound.reps must be at least 2");
        cfg.debug = doc.value("debug", cfg.debug);
        cfg.threads = std::max(1, doc.value("threads", cfg.threads));
        return cfg;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw ConfigError(std::string("malformed study config: ") + e.what());
    }
}

StudyConfig load_study_config(std::filesystem::path const& path)
{
    return parse_study_config(read_json_file(path), path.parent_path());
}

SignTest sign_test(std::vector<double> const& earlier,
                   std::vector<double> const& later)
{
    SignTest out;
    std::size_t const m = std::min(earlier.size(), later.size());
    for (std::size_t k = 0; k < m; ++k)
    {
        if (later[k] < earlier[k])
            ++out.decreases;
        else if (later[k] > earlier[k])
            ++out.increases;
    }
    out.p_value
        = binomial_upper_tail(out.decreases + out.increases, out.decreases);
    return out;
}

void summarize_study(StudyReport& report)
{
    report.summary.clear();
    report.trends.clear();
    report.comparisons.clear();

    std::vector<PolicyKind> policies;
    std::vector<long> ns;
    for (auto const& c : report.cells)
    {
        if (std::find(policies.begin(), policies.end(), c.policy)
            == policies.end())
        {
            policies.push_back(c.policy);
        }
        if (std::find(ns.begin(), ns.end(), c.n) == ns.end())
            ns.push_back(c.n);
    }
    std::sort(ns.begin(), ns.end());

    auto const& lb = report.lower_bound;
    std::map<std::pair<int, long>, double> ratios;
    for (auto policy : policies)
    {
        for (long n : ns)
        {
            auto const cost = column(report.cells, policy, n, &Cell::cost);
            if (cost.empty())
                continue;
            CellSummary s;
            s.policy = policy;
            s.n = n;
            s.reps = static_cast<int>(cost.size());
            double sum = 0;
            for (double x : cost)
                sum += x;
            s.cost_mean = sum / s.reps;
            double ss = 0;
            for (double x : cost)
                ss += (x - s.cost_mean) * (x - s.cost_mean);
            s.cost_se = s.reps > 1
                            ? std::sqrt(ss / (s.reps - 1) / s.reps)
                            : 0.0;
            s.ssc_gap_median
                = median(column(report.cells, policy, n, &Cell::ssc_gap_sup));
            s.b_hat_median
                = median(column(report.cells, policy, n, &Cell::b_hat_sup));
            auto const tq
                = column(report.cells, policy, n, &Cell::theta_q_mean);
            double tsum = 0;
            for (double x : tq)
                tsum += x;
            s.theta_q_mean = tsum / static_cast<double>(tq.size());
            if (lb.mean > 0)
            {
                s.ratio = s.cost_mean / lb.mean;
                double const rc = s.cost_mean != 0 ? s.cost_se / s.cost_mean
                                                   : 0.0;
                double const rl = lb.se / lb.mean;
                s.ratio_se = std::abs(s.ratio) * std::hypot(rc, rl);
            }
            ratios[{static_cast<int>(policy), n}] = s.ratio;
            report.summary.push_back(s);
        }

        for (std::size_t k = 0; k + 1 < ns.size(); ++k)
        {
            for (auto metric : {std::make_pair("ssc_gap_sup", &Cell::ssc_gap_sup),
                                std::make_pair("b_hat_sup", &Cell::b_hat_sup)})
            {
                auto const a = column(report.cells, policy, ns[k], metric.second);
                auto const b
                    = column(report.cells, policy, ns[k + 1], metric.second);
                if (a.empty() || b.empty())
                    continue;
                TrendVerdict v;
                v.metric = metric.first;
                v.policy = policy;
                v.n_from = ns[k];
                v.n_to = ns[k + 1];
                v.median_from = median(a);
                v.median_to = median(b);
                v.test = sign_test(a, b);
                v.decreasing = v.median_to < v.median_from
                               && v.test.p_value < 0.05;
                report.trends.push_back(v);
            }
        }
    }

    bool const has_tracking
        = std::find(policies.begin(), policies.end(), PolicyKind::tracking)
          != policies.end();
    if (!has_tracking)
        return;
    for (auto policy : policies)
    {
        if (policy == PolicyKind::tracking)
            continue;
        for (long n : ns)
        {
            auto const base = column(report.cells, policy, n, &Cell::cost);
            auto const track
                = column(report.cells, PolicyKind::tracking, n, &Cell::cost);
            if (base.empty() || track.empty())
                continue;
            PolicyComparison cmp;
            cmp.baseline = policy;
            cmp.n = n;
            cmp.ratio_baseline = ratios[{static_cast<int>(policy), n}];
            cmp.ratio_tracking
                = ratios[{static_cast<int>(PolicyKind::tracking), n}];
            cmp.test = sign_test(base, track);
            cmp.tracking_better = cmp.ratio_baseline > cmp.ratio_tracking
                                  && cmp.test.p_value < 0.05;
            report.comparisons.push_back(cmp);
        }
    }
}

StudyReport run_convergence_study(StudyConfig const& config,
                                  ModelFile const& file)
{
    auto const& model = file.model;
    FluidSolution const fluid = analyze(model);
    check_preconditions(file, fluid);

    PolicySettings base = file.policy;
    if (config.kappa_exponent)
        base.kappa.kappa_exponent = *config.kappa_exponent;
    if (config.kappa_bar_exponent)
        base.kappa.kappa_bar_exponent = *config.kappa_bar_exponent;

    std::vector<CellSetup> setups;
    for (auto policy : config.policies)
    {
        for (long n : config.n)
        {
            CellSetup s;
            s.policy = policy;
            s.instance = build_instance(model.params, model.topology, n);
            s.start = initial_state(model.topology, s.instance, fluid);
            PolicySettings settings = base;
            settings.kind = policy;
            s.rule = make_policy(settings, model, s.instance, fluid, file.cost);
            s.minimizer = std::make_unique<PerturbedMinimizer>(
                file.cost,
                minimizer_params(settings, s.instance, fluid, file.cost));
            s.diagnostics = make_diagnostics(model.topology, s.instance, fluid,
                                             &file.cost, s.minimizer.get());
            setups.push_back(std::move(s));
        }
    }

    int const reps = config.reps;
    std::size_t const tasks = setups.size() * static_cast<std::size_t>(reps);
    std::vector<Cell> cells(tasks);
    std::vector<RunStats> stats(tasks);
    std::vector<std::optional<ScaledPaths>> samples(setups.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true)
        {
            std::size_t const task = next.fetch_add(1);
            if (task >= tasks)
                return;
            auto const& s = setups[task / reps];
            int const rep = static_cast<int>(task % reps);
            try
            {
                RunOptions opts;
                opts.horizon = config.horizon;
                opts.seed = config.rep_seed(rep);
                opts.debug = config.debug;
                if (rep == 0)
                {
                    opts.record.mode = RecordConfig::Mode::subsampled;
                    opts.record.interval = config.horizon / 1000;
                }
                auto result = run_simulation(model, s.instance, s.start,
                                             *s.rule, opts, s.diagnostics);
                Cell& c = cells[task];
                c.policy = s.policy;
                c.n = s.instance.n;
                c.rep = rep;
                c.seed = opts.seed;
                c.cost = result.stats.cost_integral;
                c.ssc_gap_sup = result.stats.sup_ssc_gap;
                c.b_hat_sup = result.stats.sup_b_hat;
                c.theta_q_mean = result.stats.mean_theta_q;
                if (rep == 0)
                {
                    samples[task / reps] = scale_paths(
                        result.path, model.topology, s.instance, fluid);
                }
                stats[task] = std::move(result.stats);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = tasks;
            }
        }
    };
    int const threads
        = std::max(1, std::min<int>(config.threads, static_cast<int>(tasks)));
    if (threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    StudyReport report;
    report.model = model.name;
    report.horizon = config.horizon;
    report.cells = std::move(cells);
    for (auto const& st : stats)
    {
        report.counters.events += st.events;
        report.counters.state_violations += st.state_violations;
        report.counters.policy_violations += st.policy_violations;
        report.counters.flow_balance_failures += st.flow_balance ? 0 : 1;
    }
    for (std::size_t k = 0; k < setups.size(); ++k)
    {
        if (samples[k])
        {
            report.samples.push_back(
                {setups[k].policy, setups[k].instance.n, std::move(*samples[k])});
        }
    }

    double const dt = config.lb_dt > 0 ? config.lb_dt : config.horizon / 1e5;
    RbmParams const rbm = rbm_params(fluid, config.horizon, dt);
    report.lower_bound = lower_bound_estimate(file.cost, fluid.theta, rbm,
                                              config.lb_reps, config.lb_seed);
    summarize_study(report);
    return report;
}

std::string render_markdown(StudyReport const& report)
{
    auto const& lb = report.lower_bound;
    std::ostringstream os;
    char buf[256];
    os << "# Convergence study: " << report.model << "\n\n";
    std::snprintf(buf, sizeof(buf),
                  "Horizon u = %g. Lower bound E int C*(Q*) dt = %.4f +/- "
                  "%.4f (SE, %d paths, dt = %g).\n\n",
                  report.horizon, lb.mean, lb.se, lb.reps, lb.dt);
    os << buf;
    os << "| policy | n | reps | cost mean | cost SE | lower bound | ratio "
          "| ratio SE | median sup SSC gap | median sup B-hat | mean "
          "theta'Q-hat |\n";
    os << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (auto const& s : report.summary)
    {
        std::snprintf(buf, sizeof(buf),
                      "| %s | %ld | %d | %.4f | %.4f | %.4f | %.4f | %.4f | "
                      "%.4f | %.4f | %.4f |\n",
                      to_string(s.policy).c_str(), s.n, s.reps, s.cost_mean,
                      s.cost_se, lb.mean, s.ratio, s.ratio_se,
                      s.ssc_gap_median, s.b_hat_median, s.theta_q_mean);
        os << buf;
    }
    if (!report.trends.empty())
    {
        os << "\n## Trends (paired by replication, one-sided sign test)\n\n";
        os << "| policy | metric | n | median | median next | decreases | "
              "increases | p | verdict |\n";
        os << "|---|---|---|---:|---:|---:|---:|---:|---|\n";
        for (auto const& t : report.trends)
        {
            std::snprintf(buf, sizeof(buf),
                          "| %s | %s | %ld -> %ld | %.4f | %.4f | %d | %d | "
                          "%.3g | %s |\n",
                          to_string(t.policy).c_str(), t.metric.c_str(),
                          t.n_from, t.n_to, t.median_from, t.median_to,
                          t.test.decreases, t.test.increases, t.test.p_value,
                          t.decreasing ? "decreasing" : "not shown");
            os << buf;
        }
    }
    if (!report.comparisons.empty())
    {
        os << "\n## Baselines against tracking (common random numbers)\n\n";
        os << "| baseline | n | baseline ratio | tracking ratio | tracking "
              "cheaper | baseline cheaper | p | verdict |\n";
        os << "|---|---:|---:|---:|---:|---:|---:|---|\n";
        for (auto const& c : report.comparisons)
        {
            std::snprintf(buf, sizeof(buf),
                          "| %s | %ld | %.4f | %.4f | %d | %d | %.3g | %s |\n",
                          to_string(c.baseline).c_str(), c.n,
                          c.ratio_baseline, c.ratio_tracking,
                          c.test.decreases, c.test.increases, c.test.p_value,
                          c.tracking_better ? "tracking better" : "not shown");
            os << buf;
        }
    }
    os << "\nEvents simulated: " << report.counters.events
       << ". State violations: " << report.counters.state_violations
       << ". Policy violations: " << report.counters.policy_violations
       << ". Flow-balance failures: "
       << report.counters.flow_balance_failures << ".\n";
    return os.str();
}

void write_paths_csv(std::filesystem::path const& file,
                     ScaledPaths const& paths, Topology const& topology)
{
    int const I = topology.classes;
    int const J = topology.pools;
    int const K = topology.edge_count();
    std::ostringstream os;
    os << 't';
    for (int i = 0; i < I; ++i)
        os << ",Qhat_" << i + 1;
    for (int i = 0; i < I; ++i)
        os << ",Xhat_" << i + 1;
    for (auto const& e : topology.edges)
        os << ",Bhat_" << e.cls + 1 << '_' << e.pool + 1;
    for (int j = 0; j < J; ++j)
        os << ",Ihat_" << j + 1;
    os << '\n';
    for (std::size_t g = 0; g < paths.t.size(); ++g)
    {
        os << format_number(paths.t[g]);
        for (int i = 0; i < I; ++i)
            os << ',' << format_number(paths.q_hat[g * I + i]);
        for (int i = 0; i < I; ++i)
            os << ',' << format_number(paths.x_hat[g * I + i]);
        for (int k = 0; k < K; ++k)
            os << ',' << format_number(paths.b_hat[g * K + k]);
        for (int j = 0; j < J; ++j)
            os << ',' << format_number(paths.i_hat[g * J + j]);
        os << '\n';
    }
    write_text(file, os.str());
}

void write_study_outputs(StudyReport const& report, StudyConfig const& config,
                         ModelFile const& file)
{
    std::filesystem::create_directories(config.out);
    write_text(config.out / "cells.csv", cells_csv(report.cells));
    write_text(config.out / "lb.json",
               lower_bound_json(report.lower_bound).dump(2) + "\n");

    json doc;
    doc["model"] = report.model;
    doc["horizon"] = report.horizon;
    doc["lower_bound"] = lower_bound_json(report.lower_bound);
    json summary = json::array();
    for (auto const& s : report.summary)
    {
        summary.push_back({{"policy", to_string(s.policy)},
                           {"n", s.n},
                           {"reps", s.reps},
                           {"cost_mean", s.cost_mean},
                           {"cost_se", s.cost_se},
                           {"ratio", s.ratio},
                           {"ratio_se", s.ratio_se},
                           {"ssc_gap_median", s.ssc_gap_median},
                           {"b_hat_median", s.b_hat_median},
                           {"theta_q_mean", s.theta_q_mean}});
    }
    doc["summary"] = summary;
    json trends = json::array();
    for (auto const& t : report.trends)
    {
        trends.push_back({{"policy", to_string(t.policy)},
                          {"metric", t.metric},
                          {"n_from", t.n_from},
                          {"n_to", t.n_to},
                          {"median_from", t.median_from},
                          {"median_to", t.median_to},
                          {"decreases", t.test.decreases},
                          {"increases", t.test.increases},
                          {"p_value", t.test.p_value},
                          {"decreasing", t.decreasing}});
    }
    doc["trends"] = trends;
    json comparisons = json::array();
    for (auto const& c : report.comparisons)
    {
        comparisons.push_back({{"baseline", to_string(c.baseline)},
                               {"n", c.n},
                               {"ratio_baseline", c.ratio_baseline},
                               {"ratio_tracking", c.ratio_tracking},
                               {"tracking_cheaper", c.test.decreases},
                               {"baseline_cheaper", c.test.increases},
                               {"p_value", c.test.p_value},
                               {"tracking_better", c.tracking_better}});
    }
    doc["comparisons"] = comparisons;
    doc["counters"] = {{"events", report.counters.events},
                       {"state_violations", report.counters.state_violations},
                       {"policy_violations", report.counters.policy_violations},
                       {"flow_balance_failures",
                        report.counters.flow_balance_failures}};
    write_text(config.out / "report.json", doc.dump(2) + "\n");
    write_text(config.out / "report.md", render_markdown(report));

    for (auto const& s : report.samples)
    {
        write_paths_csv(config.out
                            / ("paths-" + to_string(s.policy) + "-n"
                               + std::to_string(s.n) + ".csv"),
                        s.paths, file.model.topology);
    }
}

StudyReport read_study_outputs(std::filesystem::path const& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("'" + dir.string() + "' is not a study directory");
    StudyReport report;
    report.cells = parse_cells_csv(dir / "cells.csv");
    try
    {
        report.lower_bound = lower_bound_from_json(read_json_file(dir / "lb.json"));
        if (std::filesystem::exists(dir / "report.json"))
        {
            auto const doc = read_json_file(dir / "report.json");
            report.model = doc.value("model", "");
            report.horizon = doc.value("horizon", 0.0);
            if (doc.contains("counters"))
            {
                auto const& c = doc.at("counters");
                report.counters.events = c.value("events", 0LL);
                report.counters.state_violations
                    = c.value("state_violations", 0LL);
                report.counters.policy_violations
                    = c.value("policy_violations", 0LL);
                report.counters.flow_balance_failures
                    = c.value("flow_balance_failures", 0LL);
            }
        }
    }
    catch (nlohmann::json::exception const& e)
    {
        throw ConfigError(std::string("malformed study output: ") + e.what());
    }
    if (report.horizon == 0)
        report.horizon = report.lower_bound.horizon;
    summarize_study(report);
    return report;
}

}  // namespace ndslab
