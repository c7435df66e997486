// SPDX-License-Identifier: Apache-2.0
#include "ndslab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ndslab
{
namespace
{
class Tableau
{
  public:
    Tableau(StandardFormLp const& lp, double tol)
        : m_(static_cast<int>(lp.A.rows())),
          n_(static_cast<int>(lp.A.cols())),
          tol_(tol),
          t_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)),
          basis_(m_)
    {
        for (int i = 0; i < m_; ++i)
        {
            double const sign = lp.b(i) < 0 ? -1.0 : 1.0;
            t_.row(i).head(n_) = sign * lp.A.row(i);
            t_(i, n_ + i) = 1.0;
            t_(i, rhs()) = sign * lp.b(i);
            basis_[i] = n_ + i;
        }
    }

    int rhs() const { return n_ + m_; }
    bool is_artificial(int col) const { return col >= n_; }

    // Load the objective row for cost vector `cost` over all columns and
    // reduce it against the current basis.
    void set_objective(Eigen::VectorXd const& cost)
    {
        t_.row(m_).setZero();
        t_.row(m_).head(cost.size()) = cost;
        for (int i = 0; i < m_; ++i)
        {
            double const cb = t_(m_, basis_[i]);
            if (cb != 0)
                t_.row(m_) -= cb * t_.row(i);
        }
    }

    // Runs Bland pivots until optimal or unbounded. Columns >= limit never
    // enter.
    LpStatus optimize(int limit, int& pivots)
    {
        while (true)
        {
            int enter = -1;
            for (int j = 0; j < limit; ++j)
            {
                if (t_(m_, j) < -tol_)
                {
                    enter = j;
                    break;
                }
            }
            if (enter < 0)
                return LpStatus::optimal;

            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i)
            {
                double const a = t_(i, enter);
                if (a <= tol_)
                    continue;
                double const ratio = t_(i, rhs()) / a;
                if (ratio < best - tol_
                    || (std::abs(ratio - best) <= tol_ && leave >= 0
                        && basis_[i] < basis_[leave]))
                {
                    best = std::min(best, ratio);
                    leave = i;
                }
            }
            if (leave < 0)
                return LpStatus::unbounded;
            pivot(leave, enter);
            ++pivots;
        }
    }

    void pivot(int row, int col)
    {
        t_.row(row) /= t_(row, col);
        for (int i = 0; i <= m_; ++i)
        {
            if (i == row)
                continue;
            double const f = t_(i, col);
            if (f != 0)
                t_.row(i) -= f * t_.row(row);
        }
        basis_[row] = col;
    }

    // After phase one, pivot zero-level artificials out where possible.
    void expel_artificials()
    {
        for (int i = 0; i < m_; ++i)
        {
            if (!is_artificial(basis_[i]))
                continue;
            for (int j = 0; j < n_; ++j)
            {
                if (std::abs(t_(i, j)) > 1e3 * tol_)
                {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    double objective_value() const { return -t_(m_, rhs()); }

    Eigen::VectorXd solution() const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < m_; ++i)
        {
            if (!is_artificial(basis_[i]))
                x(basis_[i]) = t_(i, rhs());
        }
        return x;
    }

    std::vector<int> basis() const
    {
        std::vector<int> out(basis_);
        for (auto& b : out)
        {
            if (is_artificial(b))
                b = -1;
        }
        return out;
    }

    int variables() const { return n_; }
    int rows() const { return m_; }

  private:
    int m_;
    int n_;
    double tol_;
    Eigen::MatrixXd t_;
    std::vector<int> basis_;
};
}  // namespace

LpResult solve_simplex(StandardFormLp const& lp, double tol)
{
    if (lp.A.rows() != lp.b.size() || lp.A.cols() != lp.c.size())
        throw std::invalid_argument("solve_simplex: inconsistent dimensions");

    Tableau tab(lp, tol);
    LpResult result;

    int const n = tab.variables();
    int const m = tab.rows();
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
    phase1.tail(m).setOnes();
    tab.set_objective(phase1);
    tab.optimize(n + m, result.pivots);

    double const scale = 1.0 + lp.b.cwiseAbs().sum();
    if (tab.objective_value() > 1e3 * tol * scale)
    {
        result.status = LpStatus::infeasible;
        return result;
    }
    tab.expel_artificials();

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = lp.c;
    tab.set_objective(phase2);
    result.status = tab.optimize(n, result.pivots);
    result.x = tab.solution();
    result.objective = lp.c.dot(result.x);
    result.basis = tab.basis();
    return result;
}

}  // namespace ndslab
