// SPDX-License-Identifier: Apache-2.0
#include "ndslab/bcp.hpp"
#include "ndslab/config.hpp"
#include "ndslab/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace ndslab
{
namespace
{

DiscretePath path_of(std::vector<double> v, double dt = 1)
{
    return DiscretePath{dt, std::move(v)};
}

// Reflection by an explicit double loop over the running minimum.
std::vector<double> reflect_oracle(std::vector<double> const& z)
{
    std::vector<double> out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
    {
        double lowest = z[0];
        for (std::size_t m = 0; m <= k; ++m)
            lowest = std::min(lowest, z[m]);
        out[k] = z[k] + std::max(0.0, -lowest);
    }
    return out;
}

std::vector<double> random_walk(StreamRng& rng, int steps, double start)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> z(steps + 1);
    z[0] = start;
    for (int k = 1; k <= steps; ++k)
        z[k] = z[k - 1] + gauss(rng) - 0.05;
    return z;
}

double sup_distance(std::vector<double> const& a, std::vector<double> const& b)
{
    double d = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// E[Z(t)] / E[Z(inf)] for reflected Brownian motion with drift -1 and unit
// variance started at zero, in closed form.
double first_moment_ratio(double t)
{
    double const r = std::sqrt(t);
    double const tail = 0.5 * std::erfc(r / std::sqrt(2.0));
    double const density = std::exp(-0.5 * t) / std::sqrt(2 * M_PI);
    return 1 - 2 * (1 + t) * tail + 2 * r * density;
}

//---------------------------------------------------------------------------//
TEST(Skorohod, SmallExample)
{
    auto const out = skorohod_map(path_of({0, 1, -1, 0.5}));
    EXPECT_EQ(out.values, (std::vector<double>{0, 1, 0, 1.5}));
    EXPECT_EQ(skorohod_map(path_of({2, 3, 1})).values,
              (std::vector<double>{2, 3, 1}));
    EXPECT_EQ(skorohod_map(path_of({-2, -3, -1})).values,
              (std::vector<double>{0, 0, 2}));
}

TEST(Skorohod, MatchesDoubleLoopAndProperties)
{
    StreamRng rng(8, stream_id::rbm_base);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto const z = random_walk(rng, 300, trial % 3 == 0 ? 0.0 : 1.0);
        auto const out = skorohod_map(path_of(z, 0.1));
        EXPECT_DOUBLE_EQ(out.dt, 0.1);
        EXPECT_LT(sup_distance(out.values, reflect_oracle(z)), 1e-12);

        double push_prev = 0;
        for (std::size_t k = 0; k < z.size(); ++k)
        {
            EXPECT_GE(out.values[k], 0);
            double const push = out.values[k] - z[k];
            EXPECT_GE(push, push_prev - 1e-12);
            // The push only grows at times the output sits at zero.
            if (push > push_prev + 1e-12)
                EXPECT_NEAR(out.values[k], 0, 1e-12);
            push_prev = push;
        }

        auto const w = random_walk(rng, 300, 0.5);
        auto const out_w = skorohod_map(path_of(w, 0.1));
        EXPECT_LE(sup_distance(out.values, out_w.values),
                  2 * sup_distance(z, w) + 1e-12);
    }
}

//---------------------------------------------------------------------------//
TEST(Rbm, ParamsFromFluid)
{
    auto const file
        = load_model_file(std::string(NDSLAB_MODELS_DIR) + "/nmodel.json");
    auto const fluid = analyze(file.model);
    auto const p = rbm_params(fluid, 10, 1e-3, 0.25);
    EXPECT_NEAR(p.drift, 0, 1e-15);
    EXPECT_NEAR(p.variance, 2.56, 1e-12);
    EXPECT_EQ(p.initial, 0.25);
    EXPECT_EQ(p.horizon, 10);
    EXPECT_EQ(p.dt, 1e-3);
}

TEST(Rbm, DeterministicAndNonnegative)
{
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 5;
    p.dt = 1e-2;
    auto const a = simulate_rbm(p, 3);
    auto const b = simulate_rbm(p, 3);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.values.size(), 501u);
    EXPECT_EQ(a.values.front(), 0);
    for (double v : a.values)
        EXPECT_GE(v, 0);
    EXPECT_NE(a.values, simulate_rbm(p, 4).values);
    EXPECT_NE(a.values, simulate_rbm(p, 3, 1).values);
}

TEST(Rbm, VanishingVarianceStaysAtZero)
{
    RbmParams p;
    p.drift = -1;
    p.variance = 1e-12;
    p.horizon = 10;
    p.dt = 1e-2;
    auto const path = simulate_rbm(p, 1);
    for (double v : path.values)
        EXPECT_LT(std::abs(v), 1e-4);
}

TEST(Rbm, PositiveDriftWithoutNoiseIsLinear)
{
    RbmParams p;
    p.drift = 0.5;
    p.variance = 1e-14;
    p.initial = 1;
    p.horizon = 4;
    p.dt = 0.04;
    auto const path = simulate_rbm(p, 1);
    for (std::size_t k = 0; k < path.values.size(); ++k)
        EXPECT_NEAR(path.values[k], 1 + 0.5 * 0.04 * k, 1e-5);
}

TEST(Rbm, TransientMeanMatchesClosedForm)
{
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 4;
    p.dt = 0.04;
    int const reps = 4000;
    std::vector<double> const checkpoints{0.24, 1.0, 4.0};
    std::vector<double> sum(checkpoints.size(), 0), sq(checkpoints.size(), 0);
    for (int r = 0; r < reps; ++r)
    {
        auto const path = simulate_rbm(p, 1000 + r);
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
        {
            auto const idx = static_cast<std::size_t>(
                std::lround(checkpoints[c] / p.dt));
            sum[c] += path.values[idx];
            sq[c] += path.values[idx] * path.values[idx];
        }
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
    {
        double const mean = sum[c] / reps;
        double const se
            = std::sqrt((sq[c] / reps - mean * mean) / (reps - 1));
        EXPECT_NEAR(mean, 0.5 * first_moment_ratio(checkpoints[c]), 4 * se)
            << "t = " << checkpoints[c];
    }
}

TEST(Rbm, RefinedPathSharesTheCoarseGrid)
{
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 2;
    p.dt = 0.02;
    auto const r = simulate_rbm_refined(p, 12);
    ASSERT_EQ(r.fine.values.size(), 2 * r.coarse.values.size() - 1);
    EXPECT_DOUBLE_EQ(r.fine.dt, 0.01);
    for (std::size_t k = 0; k < r.coarse.values.size(); ++k)
        EXPECT_NEAR(r.coarse.values[k], r.fine.values[2 * k], 1e-12);
}

//---------------------------------------------------------------------------//
TEST(LowerBound, ConstantCostHasNoSpread)
{
    auto const cost = CostSpec::custom(
        1, [](Eigen::VectorXd const&) { return 2.0; });
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 3;
    p.dt = 0.01;
    auto const est = lower_bound_estimate(cost, Eigen::VectorXd::Ones(1), p,
                                          20, 5);
    EXPECT_NEAR(est.mean, 6, 1e-9);
    EXPECT_NEAR(est.sd, 0, 1e-9);
    EXPECT_EQ(est.reps, 20);
}

TEST(LowerBound, LinearCostMatchesIntegratedTransientMean)
{
    // C*(a) = 3 a for theta = 1, c = 3.
    auto const cost = CostSpec::linear(Eigen::VectorXd::Constant(1, 3.0));
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 20;
    p.dt = 0.01;
    auto const est = lower_bound_estimate(cost, Eigen::VectorXd::Ones(1), p,
                                          2000, 17);

    // Simpson's rule on the closed-form transient mean.
    int const m = 20000;
    double const h = p.horizon / m;
    double integral = first_moment_ratio(0) + first_moment_ratio(p.horizon);
    for (int k = 1; k < m; ++k)
        integral += (k % 2 ? 4 : 2) * first_moment_ratio(k * h);
    integral *= h / 3;
    double const expected = 3 * 0.5 * integral;
    EXPECT_NEAR(est.mean, expected, 3 * est.se) << "se " << est.se;
    EXPECT_LE(est.q05, est.q50);
    EXPECT_LE(est.q50, est.q95);
}

TEST(LowerBound, HalvingTheStepDoesNotMoveTheMean)
{
    auto const cost = CostSpec::linear(Eigen::VectorXd::Ones(1));
    RbmParams p;
    p.drift = -1;
    p.variance = 1;
    p.horizon = 50;
    p.dt = 0.02;
    auto const check = dt_halving_check(cost, Eigen::VectorXd::Ones(1), p,
                                        200, 3);
    EXPECT_NEAR(check.shift, check.fine.mean - check.coarse.mean, 1e-12);
    EXPECT_LT(std::abs(check.shift), check.coarse.se);
}

TEST(LowerBound, ExplicitMinimizerAttainsReducedCost)
{
    Eigen::VectorXd const theta = Eigen::Vector2d(2, 1) / std::sqrt(5.0);
    auto const cost = CostSpec::separable_power(Eigen::Vector2d(1, 4), 2);
    RbmParams p;
    p.drift = 0;
    p.variance = 2.56;
    p.horizon = 5;
    p.dt = 0.01;
    auto const path = simulate_rbm(p, 8);
    for (double a : path.values)
    {
        double const reduced = c_star(cost, theta, a);
        EXPECT_NEAR(cost(minimizer_f(cost, theta, a)), reduced,
                    1e-12 * (1 + reduced));
    }
}

TEST(Quantile, LinearInterpolation)
{
    std::vector<double> const v{4, 1, 3, 2};
    EXPECT_DOUBLE_EQ(quantile(v, 0), 1);
    EXPECT_DOUBLE_EQ(quantile(v, 1), 4);
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile(v, 1.0 / 3), 2);
    EXPECT_DOUBLE_EQ(quantile({7}, 0.3), 7);
}

}  // namespace
}  // namespace ndslab
