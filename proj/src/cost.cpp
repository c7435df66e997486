// SPDX-License-Identifier: Apache-2.0
#include "ndslab/cost.hpp"

#include "ndslab/model.hpp"
#include "ndslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ndslab
{

CostSpec CostSpec::linear(Eigen::VectorXd coefficients)
{
    if ((coefficients.array() < 0).any())
        throw ConfigError("linear cost coefficients must be nonnegative");
    CostSpec c;
    c.kind_ = CostKind::linear;
    c.dimension_ = static_cast<int>(coefficients.size());
    c.coefficients_ = std::move(coefficients);
    c.label_ = "linear";
    return c;
}

CostSpec CostSpec::separable_power(Eigen::VectorXd coefficients,
                                   double exponent)
{
    if (!(exponent > 1))
        throw ConfigError("separable power cost needs exponent > 1");
    if ((coefficients.array() <= 0).any())
        throw ConfigError("separable power coefficients must be positive");
    CostSpec c;
    c.kind_ = CostKind::separable_power;
    c.dimension_ = static_cast<int>(coefficients.size());
    c.coefficients_ = std::move(coefficients);
    c.exponent_ = exponent;
    c.label_ = "separable_power";
    return c;
}

CostSpec CostSpec::custom(int dimension, Evaluator evaluator, std::string label)
{
    CostSpec c;
    c.kind_ = CostKind::custom;
    c.dimension_ = dimension;
    c.evaluator_ = std::move(evaluator);
    c.label_ = std::move(label);
    return c;
}

CostSpec CostSpec::quadratic_form(Eigen::MatrixXd matrix)
{
    if (matrix.rows() != matrix.cols())
        throw ConfigError("quadratic form matrix must be square");
    if ((matrix.array() < 0).any())
        throw ConfigError("quadratic form entries must be nonnegative");
    int const dim = static_cast<int>(matrix.rows());
    Eigen::MatrixXd m = matrix;
    auto c = custom(
        dim, [m](Eigen::VectorXd const& q) { return q.dot(m * q); },
        "quadratic_form");
    c.matrix_ = std::move(matrix);
    return c;
}

double CostSpec::operator()(Eigen::VectorXd const& q) const
{
    switch (kind_)
    {
        case CostKind::linear:
            return coefficients_.dot(q);
        case CostKind::separable_power:
        {
            double sum = 0;
            for (int i = 0; i < dimension_; ++i)
                sum += coefficients_(i) * std::pow(q(i), exponent_);
            return sum;
        }
        case CostKind::custom:
            return evaluator_(q);
    }
    return 0;
}

namespace
{
int cheapest_class(Eigen::VectorXd const& c, Eigen::VectorXd const& theta)
{
    int best = 0;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.size(); ++i)
    {
        double const r = c(i) / theta(i);
        if (r <= best_ratio)
        {
            best_ratio = r;
            best = i;
        }
    }
    return best;
}

// Lagrangian direction for separable power costs: q_i proportional to
// (theta_i / c_i)^{1/(p-1)}.
Eigen::VectorXd power_direction(CostSpec const& cost,
                                Eigen::VectorXd const& theta)
{
    double const inv = 1.0 / (cost.exponent() - 1.0);
    Eigen::VectorXd w(theta.size());
    for (int i = 0; i < theta.size(); ++i)
        w(i) = std::pow(theta(i) / cost.coefficients()(i), inv);
    return w;
}

Eigen::VectorXd power_minimizer_bisection(CostSpec const& cost,
                                          Eigen::VectorXd const& theta,
                                          double a)
{
    double const p = cost.exponent();
    double const inv = 1.0 / (p - 1.0);
    auto const& c = cost.coefficients();
    // C_i'(q_i) = y theta_i  =>  q_i = (y theta_i / (p c_i))^{1/(p-1)}
    auto point = [&](double y) {
        Eigen::VectorXd q(theta.size());
        for (int i = 0; i < theta.size(); ++i)
        {
            double const base = y * theta(i) / (p * c(i));
            q(i) = inv == 1.0 ? base : std::pow(base, inv);
        }
        return q;
    };
    auto load = [&](double y) { return theta.dot(point(y)); };

    double lo = 0;
    double hi = 1;
    while (load(hi) < a)
    {
        lo = hi;
        hi *= 2;
    }
    for (int iter = 0; iter < 2000; ++iter)
    {
        double const mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (load(mid) < a)
            lo = mid;
        else
            hi = mid;
    }
    Eigen::VectorXd q = point(0.5 * (lo + hi));
    // Remove the last ulp-level mismatch so theta'q = a holds to rounding.
    double const got = theta.dot(q);
    if (got > 0)
        q *= a / got;
    return q;
}

// Best point on the segment q + t d, t in [lo, hi], by a coarse scan and a
// golden-section refinement around the best sample.
double line_search(CostSpec const& cost, Eigen::VectorXd const& q,
                   Eigen::VectorXd const& d, double lo, double hi,
                   double& best_value)
{
    constexpr int kSamples = 32;
    double best_t = 0;
    best_value = cost(q);
    int best_k = -1;
    double const step = (hi - lo) / kSamples;
    for (int k = 0; k <= kSamples; ++k)
    {
        double const t = k == kSamples ? hi : lo + k * step;
        double const v = cost(q + t * d);
        if (v < best_value)
        {
            best_value = v;
            best_t = t;
            best_k = k;
        }
    }
    if (best_k < 0)
        return 0;

    double a = std::max(lo, best_t - step);
    double b = std::min(hi, best_t + step);
    constexpr double kGolden = 0.6180339887498949;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = cost(q + x1 * d);
    double f2 = cost(q + x2 * d);
    for (int iter = 0; iter < 80 && b - a > 1e-15 * (1 + std::abs(best_t));
         ++iter)
    {
        if (f1 < f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = cost(q + x1 * d);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = cost(q + x2 * d);
        }
    }
    double const t = f1 < f2 ? x1 : x2;
    double const v = std::min(f1, f2);
    if (v < best_value)
    {
        best_value = v;
        best_t = t;
    }
    return best_t;
}

// Pairwise coordinate descent on {q >= 0, theta'q = a}: each move shifts
// workload between two classes.
Eigen::VectorXd slice_descent(CostSpec const& cost,
                              Eigen::VectorXd const& theta, Eigen::VectorXd q)
{
    int const I = static_cast<int>(theta.size());
    double value = cost(q);
    for (int sweep = 0; sweep < 500; ++sweep)
    {
        bool improved = false;
        for (int i = 0; i < I; ++i)
        {
            for (int k = i + 1; k < I; ++k)
            {
                Eigen::VectorXd d = Eigen::VectorXd::Zero(I);
                d(i) = 1.0 / theta(i);
                d(k) = -1.0 / theta(k);
                double const lo = -theta(i) * q(i);
                double const hi = theta(k) * q(k);
                if (hi - lo <= 0)
                    continue;
                double candidate = value;
                double const t = line_search(cost, q, d, lo, hi, candidate);
                if (t != 0 && candidate < value - 1e-15 * (1 + std::abs(value)))
                {
                    q += t * d;
                    q(i) = std::max(q(i), 0.0);
                    q(k) = std::max(q(k), 0.0);
                    value = cost(q);
                    improved = true;
                }
            }
        }
        if (!improved)
            break;
    }
    return q;
}

Eigen::VectorXd numeric_minimizer(CostSpec const& cost,
                                  Eigen::VectorXd const& theta, double a)
{
    int const I = static_cast<int>(theta.size());
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(a * theta / theta.squaredNorm());
    for (int i = 0; i < I; ++i)
    {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(I);
        v(i) = a / theta(i);
        starts.push_back(v);
    }
    StreamRng rng(0x5eedc057ULL, stream_id::restart);
    std::exponential_distribution<double> expo(1.0);
    for (int r = 0; r < 16; ++r)
    {
        Eigen::VectorXd w(I);
        for (int i = 0; i < I; ++i)
            w(i) = expo(rng);
        starts.push_back(a * w / theta.dot(w));
    }

    Eigen::VectorXd best;
    double best_value = std::numeric_limits<double>::infinity();
    for (auto const& s : starts)
    {
        Eigen::VectorXd q = slice_descent(cost, theta, s);
        double const v = cost(q);
        if (best.size() == 0
            || v < best_value - 1e-13 * (1 + std::abs(best_value)))
        {
            best_value = v;
            best = q;
        }
    }

    double const residual = std::abs(theta.dot(best) - a);
    if (!std::isfinite(best_value) || residual > 1e-10 * std::max(1.0, a))
    {
        std::ostringstream os;
        os << "custom cost minimizer did not converge at a = " << a
           << " (value " << best_value << ", slice residual " << residual
           << ")";
        throw ModelError(os.str());
    }
    double const got = theta.dot(best);
    if (got > 0)
        best *= a / got;
    return best;
}
}  // namespace

double c_star(CostSpec const& cost, Eigen::VectorXd const& theta, double a)
{
    a = std::max(a, 0.0);
    switch (cost.kind())
    {
        case CostKind::linear:
        {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < theta.size(); ++i)
                best = std::min(best, cost.coefficients()(i) * a / theta(i));
            return best;
        }
        case CostKind::separable_power:
        {
            Eigen::VectorXd const w = power_direction(cost, theta);
            return cost((a / theta.dot(w)) * w);
        }
        case CostKind::custom:
            if (a == 0)
                return cost(Eigen::VectorXd::Zero(theta.size()));
            return cost(numeric_minimizer(cost, theta, a));
    }
    return 0;
}

ReducedCost::ReducedCost(CostSpec cost, Eigen::VectorXd theta)
    : cost_(std::move(cost)), theta_(std::move(theta))
{
    if (cost_.kind() != CostKind::custom)
        factor_ = c_star(cost_, theta_, 1.0);
}

double ReducedCost::operator()(double a) const
{
    a = std::max(a, 0.0);
    switch (cost_.kind())
    {
        case CostKind::linear:
            return factor_ * a;
        case CostKind::separable_power:
            return factor_ * std::pow(a, cost_.exponent());
        case CostKind::custom:
            return c_star(cost_, theta_, a);
    }
    return 0;
}

Eigen::VectorXd minimizer_f(CostSpec const& cost, Eigen::VectorXd const& theta,
                            double a)
{
    int const I = static_cast<int>(theta.size());
    if (a <= 0)
        return Eigen::VectorXd::Zero(I);
    switch (cost.kind())
    {
        case CostKind::linear:
        {
            Eigen::VectorXd q = Eigen::VectorXd::Zero(I);
            int const root = cheapest_class(cost.coefficients(), theta);
            q(root) = a / theta(root);
            return q;
        }
        case CostKind::separable_power:
            return power_minimizer_bisection(cost, theta, a);
        case CostKind::custom:
            return numeric_minimizer(cost, theta, a);
    }
    return Eigen::VectorXd::Zero(I);
}

int default_root(CostSpec const& cost, Eigen::VectorXd const& theta)
{
    if (cost.kind() == CostKind::linear)
        return cheapest_class(cost.coefficients(), theta);
    return static_cast<int>(theta.size()) - 1;
}

double KappaSchedule::kappa(long n) const
{
    return kappa_scale * std::pow(static_cast<double>(n), -kappa_exponent);
}

double KappaSchedule::kappa_bar(long n) const
{
    return kappa_bar_scale
           * std::pow(static_cast<double>(n), -kappa_bar_exponent);
}

PerturbedMinimizer::PerturbedMinimizer(CostSpec cost, MinimizerParams params)
    : cost_(std::move(cost)), params_(std::move(params))
{
    int const I = static_cast<int>(params_.theta.size());
    if (params_.root < 0 || params_.root >= I)
        throw ConfigError("perturbed minimizer: root class out of range");
    if (!(params_.kappa > 0) || !(params_.kappa < params_.kappa_bar))
        throw ConfigError("perturbed minimizer needs 0 < kappa < kappa_bar");
    low_slope_ = (static_cast<double>(I) * params_.theta).cwiseInverse();
}

Eigen::VectorXd PerturbedMinimizer::operator()(double x) const
{
    auto const& theta = params_.theta;
    int const I = static_cast<int>(theta.size());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(I);
    if (x <= 0)
        return q;

    double const kappa = params_.kappa;
    double const kappa_bar = params_.kappa_bar;
    Eigen::VectorXd f;
    if (x >= kappa_bar)
        f = minimizer_f(cost_, theta, x);

    double load = 0;
    for (int i = 0; i < I; ++i)
    {
        if (i == params_.root)
            continue;
        if (x < kappa)
            q(i) = low_slope_(i) * x;
        else if (x < kappa_bar)
            q(i) = low_slope_(i) * kappa;
        else
            q(i) = f(i) * (1.0 - kappa_bar / x) + low_slope_(i) * kappa;
        load += theta(i) * q(i);
    }
    q(params_.root) = (x - load) / theta(params_.root);
    return q;
}

CostCheck check_cost(CostSpec const& cost, Eigen::VectorXd const& theta,
                     double a_max, int grid, double tol)
{
    CostCheck out;
    int const I = static_cast<int>(theta.size());
    out.nonnegative_at_zero = cost(Eigen::VectorXd::Zero(I)) >= 0;

    StreamRng rng(0xc0575eedULL, stream_id::restart + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000 && out.monotone; ++trial)
    {
        Eigen::VectorXd q(I), dq(I);
        for (int i = 0; i < I; ++i)
        {
            q(i) = a_max * unit(rng);
            dq(i) = a_max * unit(rng) * (unit(rng) < 0.5 ? 0.0 : 1.0);
        }
        double const lo = cost(q);
        double const hi = cost(q + dq);
        if (hi < lo - tol * (1 + std::abs(lo)))
            out.monotone = false;
    }

    std::vector<double> values(grid);
    double const h = a_max / (grid - 1);
    for (int k = 0; k < grid; ++k)
        values[k] = c_star(cost, theta, k * h);
    for (int k = 1; k + 1 < grid; ++k)
    {
        double const gap
            = values[k] - 0.5 * (values[k - 1] + values[k + 1]);
        out.worst_convexity_gap = std::max(out.worst_convexity_gap, gap);
        if (gap > tol * (1 + std::abs(values[k])))
            out.reduced_convex = false;
    }
    return out;
}

}  // namespace ndslab
