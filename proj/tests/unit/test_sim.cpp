// SPDX-License-Identifier: Apache-2.0
#include "ndslab/config.hpp"
#include "ndslab/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ndslab
{
namespace
{
using nlohmann::json;

ModelFile shipped_nmodel()
{
    return load_model_file(std::string(NDSLAB_MODELS_DIR) + "/nmodel.json");
}

ModelFile single_pool(double lambda)
{
    return parse_model(json::parse(R"({
        "topology": {"classes": 1, "pools": 1, "edges": [[1, 1]]},
        "first_order": {"lambda": )" + std::to_string(lambda) + R"(,
                        "nu": 1, "mu_bar": 1}
    })"));
}

SimState all_idle(Topology const& t, SystemInstance const& inst)
{
    auto s = SimState::empty(t);
    for (int j = 0; j < t.pools; ++j)
        s.idle[j] = inst.servers[j];
    return s;
}

// M/M/N mean queue length from the Erlang C formula.
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
    double const wait_prob = tail / (sum + tail);
    return wait_prob * rho / (1 - rho);
}

//---------------------------------------------------------------------------//
struct MomentCase
{
    ArrivalFamily family;
    double c_ia;
};

std::string moment_case_name(::testing::TestParamInfo<MomentCase> const& info)
{
    return to_string(info.param.family) + "_cv"
           + std::to_string(static_cast<int>(info.param.c_ia * 10));
}

class Interarrival : public ::testing::TestWithParam<MomentCase>
{
};

TEST_P(Interarrival, UnitMeanAndSquaredCoefficient)
{
    auto const [family, c] = GetParam();
    StreamRng rng(17, stream_id::arrival_base);
    int const m = 200000;
    double sum = 0;
    double sq = 0;
    for (int k = 0; k < m; ++k)
    {
        double const v = sample_interarrival(family, c, rng);
        ASSERT_GT(v, 0);
        sum += v;
        sq += v * v;
    }
    double const mean = sum / m;
    double const var = sq / m - mean * mean;
    double const se_mean = c / std::sqrt(m);
    EXPECT_NEAR(mean, 1, 5 * se_mean + 1e-15);
    EXPECT_NEAR(var, c * c, 0.05 * c * c + 1e-15);
}

INSTANTIATE_TEST_SUITE_P(
    Families, Interarrival,
    ::testing::Values(MomentCase{ArrivalFamily::deterministic, 0},
                      MomentCase{ArrivalFamily::exponential, 1},
                      MomentCase{ArrivalFamily::gamma, 0.5},
                      MomentCase{ArrivalFamily::gamma, 1.5},
                      MomentCase{ArrivalFamily::lognormal, 0.7}),
    moment_case_name);

TEST(Interarrival, RejectsInconsistentPairs)
{
    StreamRng rng(1, stream_id::arrival_base);
    EXPECT_THROW(sample_interarrival(ArrivalFamily::deterministic, 0.5, rng),
                 ConfigError);
    EXPECT_THROW(sample_interarrival(ArrivalFamily::exponential, 2, rng),
                 ConfigError);
    EXPECT_THROW(sample_interarrival(ArrivalFamily::gamma, 0, rng), ConfigError);
}

//---------------------------------------------------------------------------//
TEST(Apportion, LargestRemainderWithLowIndexTies)
{
    std::vector<double> const a{0.875, 0.125};
    EXPECT_EQ(apportion(a, 100), (std::vector<long>{88, 12}));
    std::vector<double> const b{0.2, 0.8};
    EXPECT_EQ(apportion(b, 10), (std::vector<long>{2, 8}));
    std::vector<double> const c{1.0 / 3, 1.0 / 3, 1.0 / 3};
    EXPECT_EQ(apportion(c, 10), (std::vector<long>{4, 3, 3}));
    std::vector<double> const d{0.0, 1.0};
    EXPECT_EQ(apportion(d, 7), (std::vector<long>{0, 7}));
}

TEST(Apportion, SumsToTotalWithinOneSeat)
{
    StreamRng rng(3, stream_id::restart);
    for (int trial = 0; trial < 500; ++trial)
    {
        int const m = 1 + static_cast<int>(rng() % 6);
        std::vector<double> w(m);
        for (auto& x : w)
            x = rng.uniform();
        double const total = std::accumulate(w.begin(), w.end(), 0.0);
        for (auto& x : w)
            x /= total;
        long const seats = static_cast<long>(rng() % 200);
        auto const got = apportion(w, seats);
        EXPECT_EQ(std::accumulate(got.begin(), got.end(), 0L), seats);
        for (int i = 0; i < m; ++i)
            EXPECT_LT(std::abs(got[i] - w[i] * seats), 1.0);
    }
}

TEST(InitialState, NModelFluidSplit)
{
    auto const file = shipped_nmodel();
    auto const fluid = analyze(file.model);
    auto const inst = build_instance(file.model.params, file.model.topology, 100);
    auto const s = initial_state(file.model.topology, inst, fluid);
    EXPECT_EQ(s.busy, (std::vector<long>{10, 2, 8}));
    EXPECT_EQ(s.idle, (std::vector<long>{0, 0}));
    EXPECT_EQ(s.queue, (std::vector<long>{0, 0}));
    EXPECT_EQ(s.headcount, (std::vector<long>{12, 8}));
    EXPECT_EQ(count_state_violations(s, file.model.topology, inst.servers), 0);

    auto const under = single_pool(0.5);
    auto const f2 = analyze(under.model);
    auto const i2 = build_instance(under.model.params, under.model.topology, 100);
    EXPECT_THROW(initial_state(under.model.topology, i2, f2), ModelError);
}

//---------------------------------------------------------------------------//
TEST(Simulation, BacklogDrains)
{
    auto const file = single_pool(0.5);
    auto const inst = build_instance(file.model.params, file.model.topology, 100);
    auto s = SimState::empty(file.model.topology);
    long const N = inst.servers[0];
    s.busy[0] = N;
    s.serving[0].assign(N, InService{});
    s.queue[0] = 200;
    s.waiting[0].assign(200, 0.0);
    s.headcount[0] = N + 200;
    BaselinePolicy const policy(PolicyKind::fifo, file.model.topology);
    RunOptions opts;
    opts.horizon = 20;  // service rate 10 per server, backlog clears by t ~ 4
    opts.seed = 4;
    opts.debug = true;
    auto const r = run_simulation(file.model, inst, s, policy, opts);
    EXPECT_LT(r.final_state.queue[0], 10);
    EXPECT_GE(r.stats.departures[0], 200);
    EXPECT_EQ(r.stats.state_violations, 0);
    EXPECT_TRUE(r.stats.flow_balance);
}

TEST(Simulation, ErlangCMeanQueue)
{
    // N = 10 servers at per-server load 0.5.
    auto const file = single_pool(0.5);
    auto const inst = build_instance(file.model.params, file.model.topology, 100);
    ASSERT_EQ(inst.servers[0], 10);
    double const expected = erlang_c_queue(10, 5.0);
    BaselinePolicy const policy(PolicyKind::fifo, file.model.topology);
    int const reps = 20;
    std::vector<double> means;
    for (int r = 0; r < reps; ++r)
    {
        RunOptions opts;
        opts.horizon = 510;
        opts.stats_from = 10;
        opts.seed = 100 + r;
        auto const res = run_simulation(file.model, inst,
                                        all_idle(file.model.topology, inst),
                                        policy, opts);
        means.push_back(res.stats.mean_queue[0]);
    }
    double const m = std::accumulate(means.begin(), means.end(), 0.0) / reps;
    double ss = 0;
    for (double x : means)
        ss += (x - m) * (x - m);
    double const se = std::sqrt(ss / (reps - 1) / reps);
    EXPECT_NEAR(m, expected, 3 * se) << "se " << se;
}

TEST(Simulation, DeterministicForASeed)
{
    auto const file = shipped_nmodel();
    auto const fluid = analyze(file.model);
    auto const inst = build_instance(file.model.params, file.model.topology, 400);
    auto const start = initial_state(file.model.topology, inst, fluid);
    auto const policy = make_policy(file.policy, file.model, inst, fluid, file.cost);
    RunOptions opts;
    opts.horizon = 2;
    opts.seed = 9;
    opts.record.mode = RecordConfig::Mode::full;
    auto const a = run_simulation(file.model, inst, start, *policy, opts);
    auto const b = run_simulation(file.model, inst, start, *policy, opts);
    EXPECT_EQ(a.path.t, b.path.t);
    EXPECT_EQ(a.path.queue, b.path.queue);
    EXPECT_EQ(a.stats.arrivals, b.stats.arrivals);
    opts.seed = 10;
    auto const c = run_simulation(file.model, inst, start, *policy, opts);
    EXPECT_NE(a.path.t, c.path.t);
}

std::string policy_case_name(::testing::TestParamInfo<PolicyKind> const& info)
{
    return to_string(info.param);
}

class FlowBalance : public ::testing::TestWithParam<PolicyKind>
{
};

TEST_P(FlowBalance, DebugRunHasNoViolations)
{
    auto const file = shipped_nmodel();
    auto const& t = file.model.topology;
    auto const fluid = analyze(file.model);
    auto const inst = build_instance(file.model.params, t, 1000);
    auto const start = initial_state(t, inst, fluid);
    PolicySettings settings = file.policy;
    settings.kind = GetParam();
    auto const policy = make_policy(settings, file.model, inst, fluid, file.cost);
    PerturbedMinimizer const fn(
        file.cost, minimizer_params(settings, inst, fluid, file.cost));
    auto const diag = make_diagnostics(t, inst, fluid, &file.cost, &fn);
    RunOptions opts;
    opts.horizon = 3;
    opts.seed = 21;
    opts.debug = true;
    opts.record.mode = RecordConfig::Mode::full;
    auto const r = run_simulation(file.model, inst, start, *policy, opts, diag);
    EXPECT_GT(r.stats.events, 10000);
    EXPECT_EQ(r.stats.state_violations, 0);
    EXPECT_EQ(r.stats.policy_violations, 0);
    EXPECT_TRUE(r.stats.flow_balance);

    // A_i(u) = X_i(u) - X_i(0) + sum_j D_ij(u).
    for (int i = 0; i < t.classes; ++i)
    {
        long served = 0;
        for (int k = 0; k < t.edge_count(); ++k)
        {
            if (t.edges[k].cls == i)
                served += r.stats.departures[k];
        }
        EXPECT_EQ(r.stats.arrivals[i], r.final_state.headcount[i]
                                           - start.headcount[i] + served);
    }
    // Recorded path is consistent at every event.
    for (std::size_t g = 0; g < r.path.size(); ++g)
    {
        auto const q = r.path.queue_at(g);
        auto const x = r.path.headcount_at(g);
        auto const b = r.path.busy_at(g);
        auto const idle = r.path.idle_at(g);
        std::vector<long> in_service(t.classes, 0), pool_busy(t.pools, 0);
        for (int k = 0; k < t.edge_count(); ++k)
        {
            in_service[t.edges[k].cls] += b[k];
            pool_busy[t.edges[k].pool] += b[k];
        }
        for (int i = 0; i < t.classes; ++i)
            ASSERT_EQ(x[i], q[i] + in_service[i]);
        for (int j = 0; j < t.pools; ++j)
            ASSERT_EQ(pool_busy[j] + idle[j], inst.servers[j]);
        if (g > 0)
            ASSERT_GE(r.path.t[g], r.path.t[g - 1]);
    }

    // Cost integral agrees with the recorded path, and the scaled identity
    // holds with the t = 0 rounding bound.
    EXPECT_NEAR(integrate_cost(r.path, file.cost, opts.horizon),
                r.stats.cost_integral, 1e-9 * (1 + r.stats.cost_integral));
    auto const scaled = scale_paths(r.path, t, inst, fluid);
    EXPECT_LE(scaled.identity_residual, 1e-12);
    for (int k = 0; k < t.edge_count(); ++k)
        EXPECT_LT(std::abs(scaled.b_hat[k]), 1 / inst.sqrt_n);
    for (int i = 0; i < t.classes; ++i)
        EXPECT_EQ(scaled.q_hat[i], 0);
}

INSTANTIATE_TEST_SUITE_P(Policies, FlowBalance,
                         ::testing::Values(PolicyKind::tracking,
                                           PolicyKind::greedy,
                                           PolicyKind::random,
                                           PolicyKind::fifo),
                         policy_case_name);

TEST(Simulation, PoissonArrivalGaps)
{
    auto const file = shipped_nmodel();
    auto const fluid = analyze(file.model);
    auto const inst = build_instance(file.model.params, file.model.topology, 1000);
    auto const start = initial_state(file.model.topology, inst, fluid);
    BaselinePolicy const policy(PolicyKind::greedy, file.model.topology);
    RunOptions opts;
    opts.horizon = 20;
    opts.seed = 5;
    opts.record.arrival_log = true;
    auto const r = run_simulation(file.model, inst, start, policy, opts);
    for (int i = 0; i < 2; ++i)
    {
        auto const& log = r.arrival_log[i];
        ASSERT_GT(log.size(), 10000u);
        EXPECT_EQ(static_cast<long>(log.size()), r.stats.arrivals[i]);
        // Equiprobable bins of the exponential law of rate lambda^n_i.
        int const bins = 20;
        std::vector<int> counts(bins, 0);
        double const rate = inst.arrival_rate(i);
        for (std::size_t k = 1; k < log.size(); ++k)
        {
            double const u = 1 - std::exp(-rate * (log[k] - log[k - 1]));
            ++counts[std::min(bins - 1, static_cast<int>(u * bins))];
        }
        double const expected = static_cast<double>(log.size() - 1) / bins;
        double chi2 = 0;
        for (int c : counts)
            chi2 += (c - expected) * (c - expected) / expected;
        EXPECT_LT(chi2, 43.8);  // chi-square(19) at 0.999
    }
}

TEST(Simulation, CommonRandomNumbersAcrossPolicies)
{
    auto const file = shipped_nmodel();
    auto const fluid = analyze(file.model);
    auto const inst = build_instance(file.model.params, file.model.topology, 400);
    auto const start = initial_state(file.model.topology, inst, fluid);
    RunOptions opts;
    opts.horizon = 3;
    opts.seed = 77;
    opts.record.arrival_log = true;
    std::vector<std::vector<std::vector<double>>> logs;
    for (auto kind : {PolicyKind::tracking, PolicyKind::greedy, PolicyKind::fifo})
    {
        PolicySettings s = file.policy;
        s.kind = kind;
        auto const p = make_policy(s, file.model, inst, fluid, file.cost);
        logs.push_back(run_simulation(file.model, inst, start, *p, opts).arrival_log);
    }
    EXPECT_EQ(logs[0], logs[1]);
    EXPECT_EQ(logs[0], logs[2]);
}

TEST(Simulation, EventCapAndBadOptions)
{
    auto const file = single_pool(0.5);
    auto const inst = build_instance(file.model.params, file.model.topology, 100);
    BaselinePolicy const policy(PolicyKind::fifo, file.model.topology);
    RunOptions opts;
    opts.horizon = 100;
    opts.event_cap = 50;
    EXPECT_THROW(run_simulation(file.model, inst,
                                all_idle(file.model.topology, inst), policy, opts),
                 EventCapExceeded);
    opts.horizon = 0;
    EXPECT_THROW(run_simulation(file.model, inst,
                                all_idle(file.model.topology, inst), policy, opts),
                 ConfigError);
}

//---------------------------------------------------------------------------//
TEST(IntegrateCost, PiecewiseConstantPath)
{
    PathRecord p;
    p.classes = 1;
    p.sqrt_n = 2;
    p.t = {0, 1, 3};
    p.queue = {2, 4, 6};
    auto const c = CostSpec::linear(Eigen::VectorXd::Ones(1));
    EXPECT_DOUBLE_EQ(integrate_cost(p, c, 4), 1 * 1 + 2 * 2 + 3 * 1);
    EXPECT_DOUBLE_EQ(integrate_cost(p, c, 2), 1 * 1 + 2 * 1);
    EXPECT_DOUBLE_EQ(integrate_cost(p, c, 0.5), 0.5);
    auto const sq = CostSpec::separable_power(Eigen::VectorXd::Ones(1), 2);
    EXPECT_DOUBLE_EQ(integrate_cost(p, sq, 4), 1 + 4 * 2 + 9);
}

TEST(RecordConfig, AutomaticSwitchesAboveTenThousand)
{
    EXPECT_EQ(RecordConfig::automatic(10000, 10).mode, RecordConfig::Mode::full);
    auto const big = RecordConfig::automatic(100000, 10);
    EXPECT_EQ(big.mode, RecordConfig::Mode::subsampled);
    EXPECT_DOUBLE_EQ(big.interval, 10.0 / 5000);
}

}  // namespace
}  // namespace ndslab
