// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace ndslab
{

enum class CostKind
{
    linear,           // sum_i c_i q_i
    separable_power,  // sum_i c_i q_i^p, p > 1
    custom,           // arbitrary continuous nondecreasing evaluator
};

//---------------------------------------------------------------------------//
/*!
 * Queue-length cost C on the nonnegative orthant.
 *
 * Linear and separable-power costs have closed-form reduced costs; custom
 * costs are minimized numerically over the workload slice.
 */
class CostSpec
{
  public:
    using Evaluator = std::function<double(Eigen::VectorXd const&)>;

    static CostSpec linear(Eigen::VectorXd coefficients);
    static CostSpec separable_power(Eigen::VectorXd coefficients,
                                    double exponent);
    static CostSpec custom(int dimension, Evaluator evaluator,
                           std::string label = "custom");
    // q' M q; nondecreasing on the orthant when M has no negative entries.
    static CostSpec quadratic_form(Eigen::MatrixXd matrix);

    double operator()(Eigen::VectorXd const& q) const;

    CostKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    Eigen::VectorXd const& coefficients() const { return coefficients_; }
    double exponent() const { return exponent_; }
    Eigen::MatrixXd const& matrix() const { return matrix_; }
    std::string const& label() const { return label_; }

  private:
    CostKind kind_ = CostKind::linear;
    int dimension_ = 0;
    Eigen::VectorXd coefficients_;
    double exponent_ = 1;
    Eigen::MatrixXd matrix_;
    Evaluator evaluator_;
    std::string label_;
};

// C*(a) = inf{C(q) : q >= 0, theta'q = a}; negative a evaluates at 0.
double c_star(CostSpec const& cost, Eigen::VectorXd const& theta, double a);

// C* with per-cost setup hoisted out of the evaluation: linear costs reduce
// to a slope and separable power costs to K a^p.
class ReducedCost
{
  public:
    ReducedCost(CostSpec cost, Eigen::VectorXd theta);

    double operator()(double a) const;

  private:
    CostSpec cost_;
    Eigen::VectorXd theta_;
    double factor_ = 0;
};

// A continuous selection f(a) of the minimizers, theta'f(a) = a. Zero for
// a <= 0. Throws ModelError when the numeric minimizer fails to converge.
Eigen::VectorXd minimizer_f(CostSpec const& cost, Eigen::VectorXd const& theta,
                            double a);

// Root class for the tracking policy: argmin_i c_i/theta_i for linear costs
// (ties to the higher index), otherwise the last class.
int default_root(CostSpec const& cost, Eigen::VectorXd const& theta);

struct MinimizerParams
{
    Eigen::VectorXd theta;
    int root = 0;
    double kappa = 0;
    double kappa_bar = 0;
};

// kappa_n = scale * n^{-exponent}, for both thresholds.
struct KappaSchedule
{
    double kappa_scale = 1.0;
    double kappa_exponent = 1.0 / 20;
    double kappa_bar_scale = 1.0;
    double kappa_bar_exponent = 1.0 / 100;

    double kappa(long n) const;
    double kappa_bar(long n) const;
};

//---------------------------------------------------------------------------//
/*!
 * Perturbed minimizer f^n: keeps every non-root coordinate strictly positive
 * near zero workload while staying within 2 kappa_bar of f.
 */
class PerturbedMinimizer
{
  public:
    PerturbedMinimizer(CostSpec cost, MinimizerParams params);

    Eigen::VectorXd operator()(double x) const;

    MinimizerParams const& params() const { return params_; }
    CostSpec const& cost() const { return cost_; }

  private:
    CostSpec cost_;
    MinimizerParams params_;
    Eigen::VectorXd low_slope_;  // (I theta_i)^{-1}
};

struct CostCheck
{
    bool nonnegative_at_zero = true;
    bool monotone = true;
    bool reduced_convex = true;
    double worst_convexity_gap = 0;

    bool ok() const { return nonnegative_at_zero && monotone && reduced_convex; }
};

// Spot checks: C(0) >= 0, monotonicity on random ordered pairs and midpoint
// convexity of C* on a uniform grid of `grid` points over [0, a_max].
CostCheck check_cost(CostSpec const& cost, Eigen::VectorXd const& theta,
                     double a_max, int grid = 200, double tol = 1e-7);

}  // namespace ndslab
