// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/cost.hpp"
#include "ndslab/fluid.hpp"

#include <cstdint>
#include <vector>

namespace ndslab
{

// Values on the uniform grid k * dt, k = 0..values.size()-1.
struct DiscretePath
{
    double dt = 0;
    std::vector<double> values;
};

// One-sided reflection at zero, evaluated on the grid points only:
// out[k] = z[k] + max(0, -min_{m <= k} z[m]).
DiscretePath skorohod_map(DiscretePath const& zeta);

struct RbmParams
{
    double drift = 0;     // theta' ell
    double variance = 1;  // sum_i theta_i^2 sigma_i^2
    double initial = 0;   // theta' X_0
    double horizon = 1;
    double dt = 1e-5;
};

RbmParams rbm_params(FluidSolution const& fluid, double horizon, double dt,
                     double initial = 0.0);

//---------------------------------------------------------------------------//
/*!
 * Reflected Brownian motion sampled exactly at the grid points.
 *
 * The free motion uses exact Gaussian increments; the reflection uses the
 * exact running minimum, drawing the minimum of each Brownian-bridge step
 * given its endpoints. The result is therefore free of the O(sqrt(dt))
 * bias of grid-monitored reflection.
 */
DiscretePath simulate_rbm(RbmParams const& params, std::uint64_t seed,
                          std::uint32_t stream = 0);

struct RefinedRbm
{
    DiscretePath coarse;  // step dt
    DiscretePath fine;    // step dt / 2, same Brownian path
};

RefinedRbm simulate_rbm_refined(RbmParams const& params, std::uint64_t seed,
                                std::uint32_t stream = 0);

struct LowerBoundEstimate
{
    double mean = 0;
    double sd = 0;
    double se = 0;
    double q05 = 0;
    double q50 = 0;
    double q95 = 0;
    int reps = 0;
    double horizon = 0;
    double dt = 0;
};

// Monte Carlo estimate of E int_0^u C*(Q*(t)) dt (trapezoid on the grid).
LowerBoundEstimate lower_bound_estimate(CostSpec const& cost,
                                        Eigen::VectorXd const& theta,
                                        RbmParams const& params, int reps,
                                        std::uint64_t seed);

struct HalvingCheck
{
    LowerBoundEstimate coarse;
    LowerBoundEstimate fine;
    double shift = 0;  // fine.mean - coarse.mean
};

// Paired estimates at dt and dt/2 on common Brownian paths.
HalvingCheck dt_halving_check(CostSpec const& cost,
                              Eigen::VectorXd const& theta,
                              RbmParams const& params, int reps,
                              std::uint64_t seed);

// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace ndslab
