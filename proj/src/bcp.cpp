// SPDX-License-Identifier: Apache-2.0
#include "ndslab/bcp.hpp"

#include "ndslab/model.hpp"
#include "ndslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ndslab
{

DiscretePath skorohod_map(DiscretePath const& zeta)
{
    DiscretePath out;
    out.dt = zeta.dt;
    out.values.resize(zeta.values.size());
    double push = 0;  // sup_{s <= t} (-zeta(s))^+
    for (std::size_t k = 0; k < zeta.values.size(); ++k)
    {
        push = std::max(push, -zeta.values[k]);
        out.values[k] = zeta.values[k] + push;
    }
    return out;
}

RbmParams rbm_params(FluidSolution const& fluid, double horizon, double dt,
                     double initial)
{
    if (!fluid.ready())
        throw ModelError("RBM parameters need heavy traffic and a spanning "
                         "basic tree");
    RbmParams p;
    p.drift = fluid.theta.dot(fluid.drift);
    p.variance = fluid.theta.cwiseAbs2().dot(fluid.sigma.cwiseAbs2());
    p.initial = initial;
    p.horizon = horizon;
    p.dt = dt;
    return p;
}

namespace
{
long step_count(RbmParams const& p)
{
    if (!(p.dt > 0) || !(p.horizon > 0))
        throw ConfigError("RBM needs positive horizon and step");
    if (p.dt > p.horizon / 100 * (1 + 1e-12))
        throw ConfigError("RBM step must not exceed horizon / 100");
    if (!(p.variance > 0))
        throw ConfigError("RBM variance must be positive");
    return std::lround(p.horizon / p.dt);
}

// Exact increment and bridge minimum (relative to the step's start) of a
// Brownian motion with the given drift and variance over a step h.
class BridgeSampler
{
  public:
    BridgeSampler(RbmParams const& p, double h, std::uint64_t seed,
                  std::uint32_t stream)
        : rng_(seed, stream_id::rbm_base + stream),
          mean_(p.drift * h),
          var_h_(p.variance * h),
          normal_(0.0, 1.0)
    {
    }

    void draw(double& increment, double& minimum)
    {
        increment = mean_ + std::sqrt(var_h_) * normal_(rng_);
        double const e = -std::log(rng_.uniform());
        minimum = 0.5
                  * (increment
                     - std::sqrt(increment * increment + 2.0 * var_h_ * e));
    }

  private:
    StreamRng rng_;
    double mean_;
    double var_h_;
    std::normal_distribution<double> normal_;
};

class Reflector
{
  public:
    explicit Reflector(double start) : level_(start), low_(start) {}

    double step(double increment, double minimum)
    {
        low_ = std::min(low_, level_ + minimum);
        level_ += increment;
        return value();
    }

    double value() const { return level_ + std::max(0.0, -low_); }

  private:
    double level_;
    double low_;
};

double trapezoid(DiscretePath const& path, ReducedCost const& reduced)
{
    auto const& v = path.values;
    if (v.size() < 2)
        return 0;
    double sum = 0.5 * (reduced(v.front()) + reduced(v.back()));
    for (std::size_t k = 1; k + 1 < v.size(); ++k)
        sum += reduced(v[k]);
    return sum * path.dt;
}

LowerBoundEstimate summarize(std::vector<double> const& samples,
                             RbmParams const& p)
{
    LowerBoundEstimate est;
    est.reps = static_cast<int>(samples.size());
    est.horizon = p.horizon;
    est.dt = p.dt;
    double sum = 0;
    for (double x : samples)
        sum += x;
    est.mean = sum / est.reps;
    double ss = 0;
    for (double x : samples)
        ss += (x - est.mean) * (x - est.mean);
    est.sd = est.reps > 1 ? std::sqrt(ss / (est.reps - 1)) : 0.0;
    est.se = est.sd / std::sqrt(static_cast<double>(est.reps));
    est.q05 = quantile(samples, 0.05);
    est.q50 = quantile(samples, 0.50);
    est.q95 = quantile(samples, 0.95);
    return est;
}
}  // namespace

DiscretePath simulate_rbm(RbmParams const& params, std::uint64_t seed,
                          std::uint32_t stream)
{
    long const steps = step_count(params);
    double const h = params.horizon / static_cast<double>(steps);
    BridgeSampler sampler(params, h, seed, stream);
    Reflector reflect(params.initial);

    DiscretePath out;
    out.dt = h;
    out.values.resize(steps + 1);
    out.values[0] = reflect.value();
    for (long k = 1; k <= steps; ++k)
    {
        double inc, low;
        sampler.draw(inc, low);
        out.values[k] = reflect.step(inc, low);
    }
    return out;
}

RefinedRbm simulate_rbm_refined(RbmParams const& params, std::uint64_t seed,
                                std::uint32_t stream)
{
    long const steps = step_count(params);
    double const h = params.horizon / static_cast<double>(steps);
    BridgeSampler sampler(params, 0.5 * h, seed, stream);
    Reflector coarse(params.initial);
    Reflector fine(params.initial);

    RefinedRbm out;
    out.coarse.dt = h;
    out.fine.dt = 0.5 * h;
    out.coarse.values.resize(steps + 1);
    out.fine.values.resize(2 * steps + 1);
    out.coarse.values[0] = coarse.value();
    out.fine.values[0] = fine.value();
    for (long k = 1; k <= steps; ++k)
    {
        double inc1, low1, inc2, low2;
        sampler.draw(inc1, low1);
        sampler.draw(inc2, low2);
        out.fine.values[2 * k - 1] = fine.step(inc1, low1);
        out.fine.values[2 * k] = fine.step(inc2, low2);
        out.coarse.values[k]
            = coarse.step(inc1 + inc2, std::min(low1, inc1 + low2));
    }
    return out;
}

LowerBoundEstimate lower_bound_estimate(CostSpec const& cost,
                                        Eigen::VectorXd const& theta,
                                        RbmParams const& params, int reps,
                                        std::uint64_t seed)
{
    if (reps < 2)
        throw ConfigError("lower bound estimate needs at least 2 replications");
    ReducedCost const reduced(cost, theta);
    std::vector<double> samples(reps);
    for (int r = 0; r < reps; ++r)
    {
        auto const path
            = simulate_rbm(params, seed, static_cast<std::uint32_t>(r));
        samples[r] = trapezoid(path, reduced);
    }
    return summarize(samples, params);
}

HalvingCheck dt_halving_check(CostSpec const& cost,
                              Eigen::VectorXd const& theta,
                              RbmParams const& params, int reps,
                              std::uint64_t seed)
{
    if (reps < 2)
        throw ConfigError("halving check needs at least 2 replications");
    ReducedCost const reduced(cost, theta);
    std::vector<double> coarse(reps), fine(reps);
    for (int r = 0; r < reps; ++r)
    {
        auto const paths = simulate_rbm_refined(
            params, seed, static_cast<std::uint32_t>(r));
        coarse[r] = trapezoid(paths.coarse, reduced);
        fine[r] = trapezoid(paths.fine, reduced);
    }
    HalvingCheck out;
    out.coarse = summarize(coarse, params);
    RbmParams half = params;
    half.dt = 0.5 * params.dt;
    out.fine = summarize(fine, half);
    out.shift = out.fine.mean - out.coarse.mean;
    return out;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        return 0;
    std::sort(values.begin(), values.end());
    double const pos = p * static_cast<double>(values.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, values.size() - 1);
    double const frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace ndslab
