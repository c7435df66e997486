// SPDX-License-Identifier: Apache-2.0
#include "ndslab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace ndslab
{

double sample_interarrival(ArrivalFamily family, double c_ia, StreamRng& rng)
{
    switch (family)
    {
        case ArrivalFamily::deterministic:
            if (c_ia != 0)
                throw ConfigError("deterministic interarrivals need c_ia = 0");
            return 1.0;
        case ArrivalFamily::exponential:
            if (c_ia != 1)
                throw ConfigError("exponential interarrivals need c_ia = 1");
            return -std::log(rng.uniform());
        case ArrivalFamily::gamma:
        {
            if (!(c_ia > 0))
                throw ConfigError("gamma interarrivals need c_ia > 0");
            double const cv2 = c_ia * c_ia;
            std::gamma_distribution<double> dist(1.0 / cv2, cv2);
            return dist(rng);
        }
        case ArrivalFamily::lognormal:
        {
            if (!(c_ia > 0))
                throw ConfigError("lognormal interarrivals need c_ia > 0");
            double const s2 = std::log1p(c_ia * c_ia);
            std::lognormal_distribution<double> dist(-0.5 * s2, std::sqrt(s2));
            return dist(rng);
        }
    }
    throw ConfigError("unknown interarrival family");
}

std::vector<long> apportion(std::span<double const> shares, long total)
{
    std::size_t const m = shares.size();
    std::vector<long> seats(m, 0);
    std::vector<double> remainder(m, 0);
    long assigned = 0;
    for (std::size_t i = 0; i < m; ++i)
    {
        double v = shares[i] * static_cast<double>(total);
        double const r = std::round(v);
        if (std::abs(v - r) < 1e-9)
            v = r;
        seats[i] = static_cast<long>(std::floor(v));
        remainder[i] = v - static_cast<double>(seats[i]);
        assigned += seats[i];
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&remainder](std::size_t a, std::size_t b) {
                         return remainder[a] > remainder[b];
                     });
    for (std::size_t k = 0; assigned < total && k < m; ++k, ++assigned)
        ++seats[order[k]];
    return seats;
}

SimState initial_state(Topology const& topology,
                       SystemInstance const& instance,
                       FluidSolution const& fluid)
{
    if (!fluid.basic.heavy_traffic)
        throw ModelError("initial_state: fluid model is not critically "
                         "loaded");
    SimState s = SimState::empty(topology);
    for (int j = 0; j < topology.pools; ++j)
    {
        std::vector<double> shares(topology.classes);
        for (int i = 0; i < topology.classes; ++i)
            shares[i] = topology.compatible(i, j) ? fluid.xi(i, j) : 0.0;
        auto const seats = apportion(shares, instance.servers[j]);
        long used = 0;
        for (int i = 0; i < topology.classes; ++i)
        {
            if (seats[i] == 0)
                continue;
            int const k = topology.edge_index(i, j);
            s.busy[k] = seats[i];
            s.headcount[i] += seats[i];
            s.serving[k].assign(seats[i], InService{0.0, 0.0});
            used += seats[i];
        }
        s.idle[j] = instance.servers[j] - used;
    }
    return s;
}

RecordConfig RecordConfig::automatic(long n, double horizon)
{
    RecordConfig cfg;
    if (n <= 10000)
    {
        cfg.mode = Mode::full;
    }
    else
    {
        cfg.mode = Mode::subsampled;
        cfg.interval = horizon / 5000;
    }
    return cfg;
}

Diagnostics make_diagnostics(Topology const& topology,
                             SystemInstance const& instance,
                             FluidSolution const& fluid, CostSpec const* cost,
                             PerturbedMinimizer const* minimizer)
{
    Diagnostics d;
    d.cost = cost;
    d.minimizer = minimizer;
    d.theta = fluid.theta;
    d.fluid_busy.resize(topology.edge_count());
    for (int k = 0; k < topology.edge_count(); ++k)
    {
        auto const& e = topology.edges[k];
        d.fluid_busy[k] = fluid.xi(e.cls, e.pool) * instance.servers[e.pool];
    }
    return d;
}

namespace
{
constexpr double kNever = std::numeric_limits<double>::infinity();

class Engine
{
  public:
    Engine(Model const& model, SystemInstance const& instance,
           SimState const& start, Policy const& policy,
           RunOptions const& options, Diagnostics const& diagnostics)
        : topo_(model.topology),
          params_(model.params),
          inst_(instance),
          policy_(policy),
          opt_(options),
          diag_(diagnostics),
          state_(start),
          policy_rng_(options.seed, stream_id::policy),
          pick_rng_(options.seed, stream_id::customer_pick)
    {
        int const I = topo_.classes;
        int const K = topo_.edge_count();
        for (int i = 0; i < I; ++i)
        {
            arrival_rng_.emplace_back(options.seed,
                                      stream_id::arrival_base + i);
        }
        for (int k = 0; k < K; ++k)
        {
            activity_rng_.emplace_back(options.seed,
                                       stream_id::activity_base + k);
        }
        next_arrival_.assign(I, kNever);
        clock_.assign(K, kNever);
        busy_time_.assign(K, 0.0);
        departures_.assign(K, 0);
        arrivals_.assign(I, 0);
        queue_area_.assign(I, 0.0);
        q_hat_ = Eigen::VectorXd::Zero(I);

        state_.t = 0;
        for (int i = 0; i < I; ++i)
            schedule_arrival(i);
        for (int k = 0; k < K; ++k)
            redraw_clock(k);

        result_.initial = start;
        result_.path.classes = I;
        result_.path.pools = topo_.pools;
        result_.path.edges = K;
        result_.path.sqrt_n = inst_.sqrt_n;
        result_.path.horizon = options.horizon;
        if (opt_.record.arrival_log)
            result_.arrival_log.assign(I, {});
    }

    RunResult run()
    {
        double const u = opt_.horizon;
        refresh_observables();
        if (opt_.debug)
            check_state();
        if (opt_.record.mode == RecordConfig::Mode::full)
            record(0.0);
        next_sample_ = 0.0;

        while (true)
        {
            auto const [when, is_arrival, index] = next_event();
            double const stop = std::min(when, u);
            sample_until(stop);
            advance(stop);
            if (when > u)
                break;

            state_.t = when;
            if (is_arrival)
                handle_arrival(index);
            else
                handle_completion(index);

            if (++events_ > opt_.event_cap)
            {
                std::ostringstream os;
                os << "event cap " << opt_.event_cap << " exceeded at t = "
                   << when << " (horizon " << u << ", n = " << inst_.n
                   << ")";
                throw EventCapExceeded(os.str());
            }
            refresh_observables();
            if (opt_.debug)
                check_state();
            if (opt_.record.mode == RecordConfig::Mode::full)
                record(when);
        }
        if (opt_.record.mode == RecordConfig::Mode::subsampled)
            sample_until(u + 0.5 * opt_.record.interval);
        finish();
        return std::move(result_);
    }

  private:
    void schedule_arrival(int i)
    {
        double const rate = inst_.arrival_rate(i);
        if (!(rate > 0))
        {
            next_arrival_[i] = kNever;
            return;
        }
        double const gap = sample_interarrival(
            params_.family[i], params_.c_ia(i), arrival_rng_[i]);
        next_arrival_[i] = state_.t + gap / rate;
    }

    void redraw_clock(int k)
    {
        long const b = state_.busy[k];
        if (b <= 0)
        {
            clock_[k] = kNever;
            return;
        }
        auto const& e = topo_.edges[k];
        double const rate = inst_.service_rate(e.cls, e.pool) * b;
        clock_[k] = state_.t - std::log(activity_rng_[k].uniform()) / rate;
    }

    struct NextEvent
    {
        double when;
        bool is_arrival;
        int index;
    };

    // Completions win ties; within a kind the lower stream index wins.
    NextEvent next_event() const
    {
        NextEvent ev{kNever, false, -1};
        for (int k = 0; k < static_cast<int>(clock_.size()); ++k)
        {
            if (clock_[k] < ev.when)
                ev = {clock_[k], false, k};
        }
        for (int i = 0; i < static_cast<int>(next_arrival_.size()); ++i)
        {
            if (next_arrival_[i] < ev.when)
                ev = {next_arrival_[i], true, i};
        }
        return ev;
    }

    void advance(double to)
    {
        double const dt = to - last_t_;
        if (dt <= 0)
            return;
        for (std::size_t k = 0; k < busy_time_.size(); ++k)
        {
            auto const& e = topo_.edges[k];
            busy_time_[k]
                += inst_.service_rate(e.cls, e.pool) * state_.busy[k] * dt;
        }
        stats().cost_integral += cost_now_ * dt;
        theta_q_area_ += theta_q_now_ * dt;
        double const from = std::max(last_t_, opt_.stats_from);
        if (to > from)
        {
            for (std::size_t i = 0; i < queue_area_.size(); ++i)
                queue_area_[i] += static_cast<double>(state_.queue[i])
                                  * (to - from);
        }
        last_t_ = to;
    }

    void handle_arrival(int i)
    {
        Decision const d = policy_.on_arrival(state_, i, policy_rng_);
        ++arrivals_[i];
        if (!result_.arrival_log.empty())
            result_.arrival_log[i].push_back(state_.t);
        ++state_.headcount[i];
        if (d.kind == Decision::Kind::route_to_pool)
        {
            int const k = topo_.edge_index(i, d.index);
            if (k < 0 || state_.idle[d.index] <= 0)
                throw std::logic_error("policy routed to an infeasible pool");
            ++state_.busy[k];
            --state_.idle[d.index];
            state_.serving[k].push_back({state_.t, state_.t});
            redraw_clock(k);
        }
        else if (d.kind == Decision::Kind::queue)
        {
            ++state_.queue[i];
            state_.waiting[i].push_back(state_.t);
        }
        else
        {
            throw std::logic_error("invalid decision on arrival");
        }
        schedule_arrival(i);
    }

    void handle_completion(int k)
    {
        auto const& e = topo_.edges[k];
        Decision const d = policy_.on_completion(state_, e.pool, policy_rng_);

        auto& in_service = state_.serving[k];
        std::size_t const pick = in_service.size() == 1
                                     ? 0
                                     : pick_rng_() % in_service.size();
        InService const done = in_service[pick];
        in_service[pick] = in_service.back();
        in_service.pop_back();
        if (opt_.record.customers)
        {
            result_.customers.push_back(
                {e.cls, e.pool, done.arrival,
                 (done.start - done.arrival) * inst_.sqrt_n,
                 (state_.t - done.start) * inst_.sqrt_n});
        }
        --state_.busy[k];
        --state_.headcount[e.cls];
        ++state_.idle[e.pool];
        ++departures_[k];
        redraw_clock(k);

        if (d.kind == Decision::Kind::admit_class)
        {
            int const c = d.index;
            int const kc = topo_.edge_index(c, e.pool);
            if (kc < 0 || state_.queue[c] <= 0)
                throw std::logic_error("policy admitted from an infeasible "
                                       "class");
            --state_.queue[c];
            double const arrived = state_.waiting[c].front();
            state_.waiting[c].pop_front();
            ++state_.busy[kc];
            --state_.idle[e.pool];
            state_.serving[kc].push_back({arrived, state_.t});
            redraw_clock(kc);
        }
        else if (d.kind != Decision::Kind::stay_idle)
        {
            throw std::logic_error("invalid decision on completion");
        }
    }

    void refresh_observables()
    {
        int const I = topo_.classes;
        for (int i = 0; i < I; ++i)
            q_hat_(i) = static_cast<double>(state_.queue[i]) / inst_.sqrt_n;
        if (diag_.cost)
            cost_now_ = (*diag_.cost)(q_hat_);
        if (diag_.theta.size() == I)
            theta_q_now_ = diag_.theta.dot(q_hat_);
        if (diag_.minimizer)
        {
            Eigen::VectorXd const target = (*diag_.minimizer)(theta_q_now_);
            double const gap = (q_hat_ - target).cwiseAbs().sum();
            stats().sup_ssc_gap = std::max(stats().sup_ssc_gap, gap);
        }
        if (!diag_.fluid_busy.empty())
        {
            double b = 0;
            for (std::size_t k = 0; k < diag_.fluid_busy.size(); ++k)
            {
                b += std::abs(static_cast<double>(state_.busy[k])
                              - diag_.fluid_busy[k]);
            }
            stats().sup_b_hat = std::max(stats().sup_b_hat, b / inst_.sqrt_n);
        }
    }

    void check_state()
    {
        stats().state_violations
            += count_state_violations(state_, topo_, inst_.servers);
        if (!policy_.invariant_holds(state_))
            ++stats().policy_violations;
    }

    void record(double t)
    {
        auto& p = result_.path;
        p.t.push_back(t);
        p.queue.insert(p.queue.end(), state_.queue.begin(),
                       state_.queue.end());
        p.headcount.insert(p.headcount.end(), state_.headcount.begin(),
                           state_.headcount.end());
        p.busy.insert(p.busy.end(), state_.busy.begin(), state_.busy.end());
        p.idle.insert(p.idle.end(), state_.idle.begin(), state_.idle.end());
        p.busy_time.insert(p.busy_time.end(), busy_time_.begin(),
                           busy_time_.end());
        p.departures.insert(p.departures.end(), departures_.begin(),
                            departures_.end());
    }

    // Records grid points in [next_sample_, to) with the current state.
    void sample_until(double to)
    {
        if (opt_.record.mode != RecordConfig::Mode::subsampled)
            return;
        double const h = opt_.record.interval;
        while (next_sample_ < to && next_sample_ <= opt_.horizon)
        {
            double const saved = last_t_;
            advance(next_sample_);
            record(next_sample_);
            last_t_ = std::max(saved, last_t_);
            ++sample_index_;
            next_sample_ = static_cast<double>(sample_index_) * h;
        }
    }

    void finish()
    {
        auto& s = stats();
        double const u = opt_.horizon;
        s.events = events_;
        s.arrivals = arrivals_;
        s.departures = departures_;
        s.mean_theta_q = theta_q_area_ / u;
        double const window = u - opt_.stats_from;
        s.mean_queue.resize(queue_area_.size());
        for (std::size_t i = 0; i < queue_area_.size(); ++i)
            s.mean_queue[i] = window > 0 ? queue_area_[i] / window : 0.0;

        for (int i = 0; i < topo_.classes; ++i)
        {
            long out = 0;
            for (int k = 0; k < topo_.edge_count(); ++k)
            {
                if (topo_.edges[k].cls == i)
                    out += departures_[k];
            }
            if (state_.headcount[i]
                != result_.initial.headcount[i] + arrivals_[i] - out)
            {
                s.flow_balance = false;
            }
        }
        result_.final_state = state_;
    }

    RunStats& stats() { return result_.stats; }

    Topology const& topo_;
    BaseParameters const& params_;
    SystemInstance const& inst_;
    Policy const& policy_;
    RunOptions const& opt_;
    Diagnostics const& diag_;

    SimState state_;
    std::vector<StreamRng> arrival_rng_;
    std::vector<StreamRng> activity_rng_;
    StreamRng policy_rng_;
    StreamRng pick_rng_;

    std::vector<double> next_arrival_;
    std::vector<double> clock_;
    std::vector<double> busy_time_;
    std::vector<long> departures_;
    std::vector<long> arrivals_;
    std::vector<double> queue_area_;
    Eigen::VectorXd q_hat_;
    double cost_now_ = 0;
    double theta_q_now_ = 0;
    double theta_q_area_ = 0;
    double last_t_ = 0;
    double next_sample_ = 0;
    long long sample_index_ = 0;
    long long events_ = 0;

    RunResult result_;
};
}  // namespace

RunResult run_simulation(Model const& model, SystemInstance const& instance,
                         SimState const& start, Policy const& policy,
                         RunOptions const& options,
                         Diagnostics const& diagnostics)
{
    if (!(options.horizon > 0))
        throw ConfigError("simulation horizon must be positive");
    if (options.record.mode == RecordConfig::Mode::subsampled
        && !(options.record.interval > 0))
    {
        throw ConfigError("subsampled recording needs a positive interval");
    }
    Engine engine(model, instance, start, policy, options, diagnostics);
    return engine.run();
}

double integrate_cost(PathRecord const& path, CostSpec const& cost, double u)
{
    double total = 0;
    Eigen::VectorXd q(path.classes);
    for (std::size_t g = 0; g < path.size(); ++g)
    {
        double const start = path.t[g];
        if (start >= u)
            break;
        double const end = g + 1 < path.size() ? std::min(path.t[g + 1], u) : u;
        auto const counts = path.queue_at(g);
        for (int i = 0; i < path.classes; ++i)
            q(i) = static_cast<double>(counts[i]) / path.sqrt_n;
        total += cost(q) * (end - start);
    }
    return total;
}

ScaledPaths scale_paths(PathRecord const& raw, Topology const& topology,
                        SystemInstance const& instance,
                        FluidSolution const& fluid)
{
    int const I = topology.classes;
    int const J = topology.pools;
    int const K = topology.edge_count();
    double const s = instance.sqrt_n;
    Eigen::VectorXd const target = fluid.fluid_headcount(instance.servers);
    std::vector<double> fluid_busy(K);
    for (int k = 0; k < K; ++k)
    {
        auto const& e = topology.edges[k];
        fluid_busy[k] = fluid.xi(e.cls, e.pool) * instance.servers[e.pool];
    }

    ScaledPaths out;
    out.t = raw.t;
    std::size_t const G = raw.size();
    out.q_hat.resize(G * I);
    out.x_hat.resize(G * I);
    out.b_hat.resize(G * K);
    out.i_hat.resize(G * J);
    out.theta_q.resize(G);
    for (std::size_t g = 0; g < G; ++g)
    {
        auto const q = raw.queue_at(g);
        auto const x = raw.headcount_at(g);
        auto const b = raw.busy_at(g);
        auto const idle = raw.idle_at(g);
        std::vector<double> b_sum(I, 0.0);
        for (int k = 0; k < K; ++k)
        {
            double const v = (static_cast<double>(b[k]) - fluid_busy[k]) / s;
            out.b_hat[g * K + k] = v;
            b_sum[topology.edges[k].cls] += v;
        }
        double tq = 0;
        for (int i = 0; i < I; ++i)
        {
            double const qh = static_cast<double>(q[i]) / s;
            double const xh = (static_cast<double>(x[i]) - target(i)) / s;
            out.q_hat[g * I + i] = qh;
            out.x_hat[g * I + i] = xh;
            if (fluid.theta.size() == I)
                tq += fluid.theta(i) * qh;
            out.identity_residual = std::max(out.identity_residual,
                                             std::abs(xh - qh - b_sum[i]));
        }
        out.theta_q[g] = tq;
        for (int j = 0; j < J; ++j)
            out.i_hat[g * J + j] = static_cast<double>(idle[j]) / s;
    }
    if (out.identity_residual > 1e-12)
        throw std::logic_error("scaled headcount identity violated");
    return out;
}

}  // namespace ndslab
