// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ndslab
{

inline constexpr double kBasicTolerance = 1e-9;

struct StaticLpSolution
{
    Eigen::MatrixXd xi;  // classes x pools allocation
    double rho = 0;
};

// Minimizes the maximal pool utilization over balanced allocations.
// Throws ModelError when no column-substochastic allocation balances lambda.
StaticLpSolution solve_static_lp(Topology const& topology,
                                 Eigen::VectorXd const& lambda,
                                 Eigen::MatrixXd const& mu_bar);

struct BasicTree
{
    std::vector<Activity> edges;
    bool heavy_traffic = false;
    bool resource_pooling = false;  // basic graph connected
    bool tree = false;              // connected with I + J - 1 edges
    bool uniqueness_certified = false;
    std::vector<std::string> notes;
};

BasicTree extract_basic_tree(Topology const& topology,
                             Eigen::VectorXd const& lambda,
                             Eigen::MatrixXd const& mu_bar,
                             StaticLpSolution const& lp,
                             double tol = kBasicTolerance);

struct WorkloadDirection
{
    Eigen::VectorXd theta;  // unit Euclidean norm, positive
    Eigen::VectorXd z;      // per pool, theta_i mu_bar_ij on basic edges
};

// Propagates theta_i mu_bar_ij = z_j along a spanning tree from class 0.
// Throws ModelError when `tree` is not a spanning tree.
WorkloadDirection compute_theta(int classes, int pools,
                                std::vector<Activity> const& tree,
                                Eigen::MatrixXd const& mu_bar);

struct DiffusionCoefficients
{
    Eigen::VectorXd drift;  // ell
    Eigen::VectorXd sigma;
};

DiffusionCoefficients compute_diffusion_params(BaseParameters const& params,
                                               Eigen::MatrixXd const& xi);

//---------------------------------------------------------------------------//
/*!
 * Everything derived from the first- and second-order parameters.
 *
 * `theta`, `z`, `drift` and `sigma` are only populated when the basic graph
 * is a spanning tree (`ready()`).
 */
struct FluidSolution
{
    Eigen::MatrixXd xi;
    double rho = 0;
    BasicTree basic;
    Eigen::VectorXd theta;
    Eigen::VectorXd z;
    Eigen::VectorXd drift;
    Eigen::VectorXd sigma;

    bool ready() const
    {
        return basic.heavy_traffic && basic.resource_pooling && basic.tree;
    }

    // Fluid headcount sum_j xi_ij N_j for the given pool sizes.
    Eigen::VectorXd fluid_headcount(std::vector<int> const& servers) const;
};

FluidSolution analyze(Model const& model, double tol = kBasicTolerance);

}  // namespace ndslab
