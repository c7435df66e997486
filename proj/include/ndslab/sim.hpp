// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/cost.hpp"
#include "ndslab/fluid.hpp"
#include "ndslab/model.hpp"
#include "ndslab/policy.hpp"
#include "ndslab/rng.hpp"
#include "ndslab/state.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ndslab
{

// Unit-mean interarrival draw with variance c_ia^2. Throws ConfigError for
// inconsistent (family, c_ia) pairs.
double sample_interarrival(ArrivalFamily family, double c_ia, StreamRng& rng);

// Q(0) = 0, I(0) = 0 and B(0) apportioned from xi* N by largest remainder
// (ties to the lower class index). Needs a critically loaded allocation.
SimState initial_state(Topology const& topology,
                       SystemInstance const& instance,
                       FluidSolution const& fluid);

// Largest-remainder apportionment of `total` seats by `shares` (which sum
// to 1). Ties go to the lower index.
std::vector<long> apportion(std::span<double const> shares, long total);

struct RecordConfig
{
    enum class Mode
    {
        none,
        full,        // every event
        subsampled,  // uniform grid of width `interval`
    };

    Mode mode = Mode::none;
    double interval = 0;
    bool customers = false;    // per-customer (wait, service) pairs
    bool arrival_log = false;  // per-class arrival times

    // Full resolution up to n = 10^4, u/5000 subsampling above.
    static RecordConfig automatic(long n, double horizon);
};

//---------------------------------------------------------------------------//
/*!
 * Recorded raw sample path. Values at index g hold on [t[g], t[g+1]);
 * the last value holds up to `horizon`. Per-grid-point arrays are
 * flattened with the obvious stride.
 */
struct PathRecord
{
    int classes = 0;
    int pools = 0;
    int edges = 0;
    double sqrt_n = 1;
    double horizon = 0;

    std::vector<double> t;
    std::vector<long> queue;         // stride classes
    std::vector<long> headcount;     // stride classes
    std::vector<long> busy;          // stride edges
    std::vector<long> idle;          // stride pools
    std::vector<double> busy_time;   // T_ij, stride edges
    std::vector<long> departures;    // D_ij, stride edges

    std::size_t size() const { return t.size(); }
    std::span<long const> queue_at(std::size_t g) const
    {
        return {queue.data() + g * classes, static_cast<std::size_t>(classes)};
    }
    std::span<long const> headcount_at(std::size_t g) const
    {
        return {headcount.data() + g * classes,
                static_cast<std::size_t>(classes)};
    }
    std::span<long const> busy_at(std::size_t g) const
    {
        return {busy.data() + g * edges, static_cast<std::size_t>(edges)};
    }
    std::span<long const> idle_at(std::size_t g) const
    {
        return {idle.data() + g * pools, static_cast<std::size_t>(pools)};
    }
};

struct CustomerRecord
{
    int cls = 0;
    int pool = 0;
    double arrival = 0;
    double wait = 0;     // scaled by sqrt(n)
    double service = 0;  // scaled by sqrt(n)
};

// Online statistics accumulated at full event resolution regardless of the
// recording mode.
struct Diagnostics
{
    CostSpec const* cost = nullptr;
    PerturbedMinimizer const* minimizer = nullptr;  // SSC target f^n
    Eigen::VectorXd theta;
    std::vector<double> fluid_busy;  // xi*_ij N_j per edge
};

Diagnostics make_diagnostics(Topology const& topology,
                             SystemInstance const& instance,
                             FluidSolution const& fluid, CostSpec const* cost,
                             PerturbedMinimizer const* minimizer);

struct RunOptions
{
    double horizon = 1;
    std::uint64_t seed = 1;
    RecordConfig record;
    bool debug = false;
    long long event_cap = 1'000'000'000LL;
    double stats_from = 0;  // start of the mean-queue window
};

struct RunStats
{
    double cost_integral = 0;   // int_0^u C(Q-hat)
    double sup_ssc_gap = 0;     // sup_t |Q-hat - f^n(theta'Q-hat)|_1
    double sup_b_hat = 0;       // sup_t |B-hat|_1
    double mean_theta_q = 0;    // (1/u) int_0^u theta'Q-hat
    std::vector<double> mean_queue;  // raw Q, time average on [stats_from, u]

    long long events = 0;
    std::vector<long> arrivals;    // A_i(u)
    std::vector<long> departures;  // D_ij(u) per edge

    long long state_violations = 0;
    long long policy_violations = 0;
    bool flow_balance = true;
};

struct RunResult
{
    RunStats stats;
    PathRecord path;
    SimState initial;
    SimState final_state;
    std::vector<CustomerRecord> customers;
    std::vector<std::vector<double>> arrival_log;
};

class EventCapExceeded : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
/*!
 * Event-driven simulation of the n-th system on [0, horizon].
 *
 * Services use one aggregate exponential clock per activity with rate
 * mu_ij B_ij, redrawn whenever B_ij changes. Simultaneous events run
 * completions first, then by ascending stream index.
 */
RunResult run_simulation(Model const& model, SystemInstance const& instance,
                         SimState const& start, Policy const& policy,
                         RunOptions const& options,
                         Diagnostics const& diagnostics = {});

// Exact integral of C(Q-hat) over the recorded path, truncated at u.
double integrate_cost(PathRecord const& path, CostSpec const& cost, double u);

struct ScaledPaths
{
    std::vector<double> t;
    std::vector<double> q_hat;    // stride classes
    std::vector<double> x_hat;    // stride classes
    std::vector<double> b_hat;    // stride edges
    std::vector<double> i_hat;    // stride pools
    std::vector<double> theta_q;  // theta' Q-hat
    double identity_residual = 0;  // max |X-hat - Q-hat - sum_j B-hat|
};

// Diffusion scaling of a raw path. Throws std::logic_error when the
// headcount identity fails beyond 1e-12.
ScaledPaths scale_paths(PathRecord const& raw, Topology const& topology,
                        SystemInstance const& instance,
                        FluidSolution const& fluid);

}  // namespace ndslab
