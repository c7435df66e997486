// SPDX-License-Identifier: Apache-2.0
#include "ndslab/cli.hpp"

#include "ndslab/bcp.hpp"
#include "ndslab/config.hpp"
#include "ndslab/sim.hpp"
#include "ndslab/study.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ndslab
{
namespace
{
namespace fs = std::filesystem;

struct Options
{
    std::string file;

    long n = 1000;
    double horizon = 10;
    std::string policy = "tracking";
    std::uint64_t seed = 1;
    int reps = 1;
    std::string out = "sim-out";
    bool debug = false;

    double dt = 0;  // 0 selects u / 1e5
    int lb_reps = 1000;

    int threads = 0;
};

int run_analyze(Options const& o, std::ostream& out)
{
    auto const file = load_model_file(o.file);
    auto const fluid = analyze(file.model);
    out << analysis_to_json(file, fluid).dump(2) << '\n';
    return 0;
}

int run_simulate(Options const& o, std::ostream& out)
{
    if (o.n < 1)
        throw ConfigError("--n must be positive");
    if (!(o.horizon > 0))
        throw ConfigError("--u must be positive");
    if (o.reps < 1)
        throw ConfigError("--reps must be positive");
    auto const file = load_model_file(o.file);
    auto const& model = file.model;
    auto const fluid = analyze(model);
    if (!fluid.ready())
        throw ModelError("model fails heavy traffic or resource pooling; see "
                         "'analyze'");
    auto const instance = build_instance(model.params, model.topology, o.n);
    auto const start = initial_state(model.topology, instance, fluid);
    PolicySettings settings = file.policy;
    settings.kind = parse_policy_kind(o.policy);
    auto const policy
        = make_policy(settings, model, instance, fluid, file.cost);
    PerturbedMinimizer const minimizer(
        file.cost, minimizer_params(settings, instance, fluid, file.cost));
    auto const diagnostics = make_diagnostics(model.topology, instance, fluid,
                                              &file.cost, &minimizer);

    fs::path const dir = o.out;
    fs::create_directories(dir);
    std::ostringstream summary;
    summary << "rep,seed,cost_integral,sup_ssc_gap,sup_B_hat,mean_theta_Q\n";
    for (int rep = 0; rep < o.reps; ++rep)
    {
        RunOptions opts;
        opts.horizon = o.horizon;
        opts.seed = o.seed + static_cast<std::uint64_t>(rep);
        opts.debug = o.debug;
        opts.record = RecordConfig::automatic(o.n, o.horizon);
        auto const result
            = run_simulation(model, instance, start, *policy, opts, diagnostics);
        if (o.debug
            && (result.stats.state_violations > 0
                || result.stats.policy_violations > 0))
        {
            throw std::runtime_error("invariant violations in replication "
                                     + std::to_string(rep));
        }
        auto const scaled
            = scale_paths(result.path, model.topology, instance, fluid);
        write_paths_csv(dir / ("paths-" + std::to_string(rep) + ".csv"),
                        scaled, model.topology);
        auto const& s = result.stats;
        summary << rep << ',' << opts.seed << ','
                << format_number(s.cost_integral) << ','
                << format_number(s.sup_ssc_gap) << ','
                << format_number(s.sup_b_hat) << ','
                << format_number(s.mean_theta_q) << '\n';
    }
    std::ofstream(dir / "summary.csv", std::ios::binary) << summary.str();
    out << "wrote " << o.reps << " replication(s) to " << dir.string() << '\n';
    return 0;
}

int run_bcp(Options const& o, std::ostream& out)
{
    auto const file = load_model_file(o.file);
    auto const fluid = analyze(file.model);
    auto const params = rbm_params(fluid, o.horizon,
                                   o.dt > 0 ? o.dt : o.horizon / 1e5);
    auto const est = lower_bound_estimate(file.cost, fluid.theta, params,
                                          o.lb_reps, o.seed);
    nlohmann::json doc = {{"mean", est.mean}, {"se", est.se},
                          {"sd", est.sd},     {"q05", est.q05},
                          {"q50", est.q50},   {"q95", est.q95},
                          {"reps", est.reps}, {"horizon", est.horizon},
                          {"dt", est.dt},     {"drift", params.drift},
                          {"variance", params.variance}};
    out << doc.dump(2) << '\n';
    return 0;
}

int run_study(Options const& o, std::ostream& out)
{
    auto config = load_study_config(o.file);
    if (o.threads > 0)
        config.threads = o.threads;
    if (o.debug)
        config.debug = true;
    auto const file = load_model_file(config.model_file);
    auto const report = run_convergence_study(config, file);
    write_study_outputs(report, config, file);
    out << render_markdown(report);
    out << "\nOutputs in " << config.out.string() << '\n';
    return 0;
}

int run_report(Options const& o, std::ostream& out)
{
    out << render_markdown(read_study_outputs(o.file));
    return 0;
}

}  // namespace

int cli_dispatch(int argc, char const* const* argv, std::ostream& out,
                 std::ostream& err)
{
    CLI::App app{"Simulation and numerics for many-server queues with "
                 "parallel server pools",
                 "nds-lab"};
    app.require_subcommand(1);
    Options o;

    auto* analyze_cmd = app.add_subcommand(
        "analyze", "Solve the static fluid problem and print JSON verdicts");
    analyze_cmd->add_option("model", o.file, "Model file (JSON)")->required();

    auto* sim_cmd
        = app.add_subcommand("simulate", "Simulate the n-th system and write "
                                         "scaled paths and a summary");
    sim_cmd->add_option("model", o.file, "Model file (JSON)")->required();
    sim_cmd->add_option("--n", o.n, "Scaling parameter")->capture_default_str();
    sim_cmd->add_option("--u", o.horizon, "Horizon")->capture_default_str();
    sim_cmd->add_option("--policy", o.policy, "tracking, greedy, random or fifo")
        ->capture_default_str();
    sim_cmd->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    sim_cmd->add_option("--reps", o.reps, "Replications")->capture_default_str();
    sim_cmd->add_option("--out", o.out, "Output directory")
        ->capture_default_str();
    sim_cmd->add_flag("--debug", o.debug, "Check invariants after each event");

    auto* bcp_cmd = app.add_subcommand(
        "bcp", "Estimate the Brownian lower bound on the cost integral");
    bcp_cmd->add_option("model", o.file, "Model file (JSON)")->required();
    bcp_cmd->add_option("--u", o.horizon, "Horizon")->capture_default_str();
    bcp_cmd->add_option("--reps", o.lb_reps, "Monte Carlo paths")
        ->capture_default_str();
    bcp_cmd->add_option("--dt", o.dt, "Grid step (default u / 1e5)");
    bcp_cmd->add_option("--seed", o.seed, "Seed")->capture_default_str();

    auto* study_cmd = app.add_subcommand(
        "study", "Run a convergence study across n and policies");
    study_cmd->add_option("config", o.file, "Study config (JSON)")->required();
    study_cmd->add_option("--threads", o.threads, "Worker threads");
    study_cmd->add_flag("--debug", o.debug, "Check invariants after each event");

    auto* report_cmd = app.add_subcommand(
        "report", "Print the markdown summary of a study directory");
    report_cmd->add_option("dir", o.file, "Study output directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const&)
    {
        out << app.help() << std::flush;
        return 0;
    }
    catch (CLI::ParseError const& e)
    {
        if (e.get_exit_code() == 0)
        {
            // --help on a subcommand and --version land here.
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\n\n"
            << app.help() << std::flush;
        return 2;
    }

    try
    {
        if (*analyze_cmd)
            return run_analyze(o, out);
        if (*sim_cmd)
            return run_simulate(o, out);
        if (*bcp_cmd)
            return run_bcp(o, out);
        if (*study_cmd)
            return run_study(o, out);
        if (*report_cmd)
            return run_report(o, out);
    }
    catch (ConfigError const& e)
    {
        err << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ndslab
