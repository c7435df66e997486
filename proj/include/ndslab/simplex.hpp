// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ndslab
{

//! Minimize c'x subject to A x = b, x >= 0.
struct StandardFormLp
{
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

enum class LpStatus
{
    optimal,
    infeasible,
    unbounded,
};

struct LpResult
{
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;
    double objective = 0;
    std::vector<int> basis;  // basic column per row (may include artificials
                             // of redundant rows, reported as -1)
    int pivots = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Two-phase dense tableau simplex with Bland's anti-cycling rule.
 *
 * Intended for the small programs that arise from fluid models (tens of
 * variables); the tableau is stored densely and pivots are O(m n).
 */
LpResult solve_simplex(StandardFormLp const& lp, double tol = 1e-12);

}  // namespace ndslab
