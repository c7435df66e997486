// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/model.hpp"

#include <deque>
#include <vector>

namespace ndslab
{

struct InService
{
    double arrival = 0;
    double start = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Live counts of the n-th system.
 *
 * `busy` is indexed by activity (topology edge order); all other per-class
 * and per-pool vectors by class and pool index.
 */
struct SimState
{
    double t = 0;
    std::vector<long> headcount;  // X_i
    std::vector<long> queue;      // Q_i
    std::vector<long> busy;       // B_ij per edge
    std::vector<long> idle;       // I_j

    // Arrival times of waiting customers, oldest first.
    std::vector<std::deque<double>> waiting;
    // Customers in service per activity.
    std::vector<std::vector<InService>> serving;

    static SimState empty(Topology const& topology);
};

// Violations of the balance equations and integrality; empty when
// consistent.
int count_state_violations(SimState const& state, Topology const& topology,
                           std::vector<int> const& servers);

}  // namespace ndslab
