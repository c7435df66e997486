// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/bcp.hpp"
#include "ndslab/config.hpp"
#include "ndslab/policy.hpp"
#include "ndslab/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ndslab
{

struct StudyConfig
{
    std::filesystem::path model_file;
    std::vector<long> n;
    double horizon = 10;
    int reps = 30;
    std::vector<PolicyKind> policies{PolicyKind::tracking};
    std::optional<double> kappa_exponent;
    std::optional<double> kappa_bar_exponent;
    std::uint64_t seed = 1;
    std::filesystem::path out = "study-out";
    int lb_reps = 1000;
    double lb_dt = 0;  // 0 selects horizon / 1e5
    std::uint64_t lb_seed = 1;
    bool debug = false;
    int threads = 1;

    // Replication r of every (policy, n) cell uses seed + r.
    std::uint64_t rep_seed(int rep) const { return seed + rep; }
};

// Relative paths inside the file resolve against its directory.
StudyConfig parse_study_config(nlohmann::json const& doc,
                               std::filesystem::path const& base_dir);
StudyConfig load_study_config(std::filesystem::path const& path);

struct Cell
{
    PolicyKind policy = PolicyKind::tracking;
    long n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double cost = 0;
    double ssc_gap_sup = 0;
    double b_hat_sup = 0;
    double theta_q_mean = 0;
};

struct CellSummary
{
    PolicyKind policy = PolicyKind::tracking;
    long n = 0;
    int reps = 0;
    double cost_mean = 0;
    double cost_se = 0;
    double ssc_gap_median = 0;
    double b_hat_median = 0;
    double theta_q_mean = 0;
    double ratio = 0;     // cost_mean / lower bound
    double ratio_se = 0;  // delta method, both SEs
};

// One-sided sign test of "later is smaller", paired by replication.
struct SignTest
{
    int decreases = 0;
    int increases = 0;
    double p_value = 1;
};

SignTest sign_test(std::vector<double> const& earlier,
                   std::vector<double> const& later);

struct TrendVerdict
{
    std::string metric;
    PolicyKind policy = PolicyKind::tracking;
    long n_from = 0;
    long n_to = 0;
    double median_from = 0;
    double median_to = 0;
    SignTest test;
    bool decreasing = false;  // medians decrease and p < 0.05
};

// Paired cost comparison of a baseline against tracking at one n, on common
// random numbers; the test counts replications where tracking is cheaper.
struct PolicyComparison
{
    PolicyKind baseline = PolicyKind::greedy;
    long n = 0;
    double ratio_baseline = 0;
    double ratio_tracking = 0;
    SignTest test;
    bool tracking_better = false;  // larger ratio and p < 0.05
};

struct RunCounters
{
    long long events = 0;
    long long state_violations = 0;
    long long policy_violations = 0;
    long long flow_balance_failures = 0;
};

// Scaled path of replication 0, kept for plotting.
struct PathSample
{
    PolicyKind policy = PolicyKind::tracking;
    long n = 0;
    ScaledPaths paths;
};

struct StudyReport
{
    std::string model;
    double horizon = 0;
    std::vector<Cell> cells;
    LowerBoundEstimate lower_bound;
    std::vector<CellSummary> summary;
    std::vector<TrendVerdict> trends;
    std::vector<PolicyComparison> comparisons;
    RunCounters counters;
    std::vector<PathSample> samples;
};

// Per-(policy, n) aggregates and trend tests; depends only on the cells and
// the lower bound.
void summarize_study(StudyReport& report);

StudyReport run_convergence_study(StudyConfig const& config,
                                  ModelFile const& file);

// report.md, report.json, cells.csv, lb.json and per-n path samples.
void write_study_outputs(StudyReport const& report, StudyConfig const& config,
                         ModelFile const& file);

std::string render_markdown(StudyReport const& report);

// Rebuilds a report from a study output directory.
StudyReport read_study_outputs(std::filesystem::path const& dir);

// Columns t, Qhat_i, Xhat_i, Bhat_i_j, Ihat_j with one-based indices.
void write_paths_csv(std::filesystem::path const& file,
                     ScaledPaths const& paths, Topology const& topology);

// Round-trip number formatting for CSV output.
std::string format_number(double x);

}  // namespace ndslab
