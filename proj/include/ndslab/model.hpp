// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndslab
{

// Thrown for malformed inputs (bad files, inconsistent parameters). The CLI
// maps it to exit code 2.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Thrown when a well-formed model cannot be processed (overload, vanishing
// pools, non-tree graphs).
class ModelError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Activity
{
    int cls = 0;
    int pool = 0;

    friend bool operator==(Activity const&, Activity const&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * Bipartite compatibility graph between customer classes and server pools.
 * Indices are zero-based.
 */
struct Topology
{
    int classes = 0;
    int pools = 0;
    std::vector<Activity> edges;

    int edge_count() const { return static_cast<int>(edges.size()); }
    // Index into `edges`, or -1 when (cls, pool) is not an activity.
    int edge_index(int cls, int pool) const;
    bool compatible(int cls, int pool) const
    {
        return edge_index(cls, pool) >= 0;
    }
};

enum class ArrivalFamily
{
    exponential,
    deterministic,
    gamma,
    lognormal,
};

std::string to_string(ArrivalFamily family);
ArrivalFamily parse_arrival_family(std::string const& name);

//---------------------------------------------------------------------------//
/*!
 * First- and second-order parameters of the scaled system family.
 *
 * Rate matrices are classes x pools and vanish off the edge set.
 */
struct BaseParameters
{
    Eigen::VectorXd lambda;      // first-order arrival rates
    Eigen::VectorXd lambda_hat;  // second-order arrival perturbation
    Eigen::VectorXd nu;          // pool size coefficients
    Eigen::MatrixXd mu_bar;      // aggregate first-order service rates
    Eigen::MatrixXd mu_hat;      // second-order service perturbation
    Eigen::VectorXd c_ia;        // interarrival coefficient of variation
    std::vector<ArrivalFamily> family;

    // Per-server diffusion-scale rate mu_ij = mu_bar_ij / nu_j.
    double per_server_rate(int cls, int pool) const
    {
        return mu_bar(cls, pool) / nu(pool);
    }
};

struct ValidationReport
{
    std::vector<std::string> findings;

    bool ok() const { return findings.empty(); }
};

ValidationReport
validate_topology(Topology const& topology, BaseParameters const& params);

//---------------------------------------------------------------------------//
/*!
 * The n-th system: concrete arrival rates, integer pool sizes and per-server
 * service rates.
 *
 * Pool sizes are round(nu_j sqrt(n)) and per-server rates are chosen so that
 * n^{-1} N_j mu_ij = mu_bar_ij + n^{-1/2} mu_hat_ij holds exactly.
 */
struct SystemInstance
{
    long n = 0;
    double sqrt_n = 0;
    Eigen::VectorXd arrival_rate;    // lambda^n_i
    std::vector<int> servers;        // N^n_j
    Eigen::MatrixXd service_rate;    // mu^n_ij, per server
    Eigen::MatrixXd rate_deviation;  // n^{-1/2} mu^n_ij - mu_ij
};

SystemInstance build_instance(BaseParameters const& params,
                              Topology const& topology, long n);

// A loaded model description: graph plus parameters, in zero-based indices.
struct Model
{
    std::string name;
    Topology topology;
    BaseParameters params;
};

}  // namespace ndslab
