// SPDX-License-Identifier: Apache-2.0
#include "ndslab/policy.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace ndslab
{

TreeLabeling label_tree(int classes, int pools,
                        std::vector<Activity> const& tree, int root)
{
    int const V = classes + pools;
    if (static_cast<int>(tree.size()) != V - 1)
        throw ModelError("label_tree: edge set is not a spanning tree");
    if (root < 0 || root >= classes)
        throw ModelError("label_tree: root class out of range");

    std::vector<std::vector<int>> adjacent(V);
    for (auto const& e : tree)
    {
        adjacent[e.cls].push_back(classes + e.pool);
        adjacent[classes + e.pool].push_back(e.cls);
    }
    std::vector<int> depth(V, -1), parent(V, -1);
    std::queue<int> frontier;
    depth[root] = 0;
    frontier.push(root);
    while (!frontier.empty())
    {
        int const v = frontier.front();
        frontier.pop();
        for (int w : adjacent[v])
        {
            if (depth[w] >= 0)
                continue;
            depth[w] = depth[v] + 1;
            parent[w] = v;
            frontier.push(w);
        }
    }
    if (std::any_of(depth.begin(), depth.end(), [](int d) { return d < 0; }))
        throw ModelError("label_tree: edge set is not a spanning tree");

    TreeLabeling out;
    out.root = root;
    out.class_depth.assign(depth.begin(), depth.begin() + classes);
    out.pool_depth.assign(depth.begin() + classes, depth.end());

    // Deeper nodes first; equal depth by ascending index.
    auto assign = [](std::vector<int> const& d, int offset) {
        std::vector<int> order(d.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&d](int a, int b) { return d[a] > d[b]; });
        std::vector<int> label(d.size());
        for (std::size_t k = 0; k < order.size(); ++k)
            label[order[k]] = offset + static_cast<int>(k) + 1;
        return label;
    };
    out.class_label = assign(out.class_depth, 0);
    out.pool_label = assign(out.pool_depth, classes);

    out.parent_pool.assign(classes, -1);
    out.child_pools.assign(classes, {});
    out.parent_class.assign(pools, -1);
    out.child_classes.assign(pools, {});
    for (int i = 0; i < classes; ++i)
    {
        if (parent[i] >= 0)
            out.parent_pool[i] = parent[i] - classes;
    }
    for (int j = 0; j < pools; ++j)
        out.parent_class[j] = parent[classes + j];
    for (auto const& e : tree)
    {
        if (parent[classes + e.pool] == e.cls)
            out.child_pools[e.cls].push_back(e.pool);
        else
            out.child_classes[e.pool].push_back(e.cls);
    }
    for (auto& c : out.child_pools)
    {
        std::sort(c.begin(), c.end(), [&out](int a, int b) {
            return out.pool_label[a] < out.pool_label[b];
        });
    }
    for (auto& c : out.child_classes)
    {
        std::sort(c.begin(), c.end(), [&out](int a, int b) {
            return out.class_label[a] < out.class_label[b];
        });
    }

    out.root_pool = -1;
    for (int j : out.child_pools[root])
    {
        if (out.root_pool < 0
            || out.pool_label[j] > out.pool_label[out.root_pool])
        {
            out.root_pool = j;
        }
    }
    return out;
}

std::string to_string(PolicyKind kind)
{
    switch (kind)
    {
        case PolicyKind::tracking:
            return "tracking";
        case PolicyKind::greedy:
            return "greedy";
        case PolicyKind::random:
            return "random";
        case PolicyKind::fifo:
            return "fifo";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(std::string const& name)
{
    if (name == "tracking")
        return PolicyKind::tracking;
    if (name == "greedy")
        return PolicyKind::greedy;
    if (name == "random")
        return PolicyKind::random;
    if (name == "fifo")
        return PolicyKind::fifo;
    throw ConfigError("unknown policy '" + name + "'");
}

//---------------------------------------------------------------------------//
// TrackingPolicy
//---------------------------------------------------------------------------//

TrackingPolicy::TrackingPolicy(Topology const& topology,
                               SystemInstance const& instance,
                               FluidSolution const& fluid,
                               PerturbedMinimizer minimizer)
    : labeling_(label_tree(topology.classes, topology.pools,
                           fluid.basic.edges, minimizer.params().root)),
      basic_(fluid.basic.edges),
      fluid_headcount_(fluid.fluid_headcount(instance.servers)),
      theta_(fluid.theta),
      sqrt_n_(instance.sqrt_n),
      minimizer_(std::move(minimizer))
{
}

Eigen::VectorXd TrackingPolicy::target(SimState const& state) const
{
    double workload = 0;
    for (int i = 0; i < theta_.size(); ++i)
    {
        double const x_hat
            = (static_cast<double>(state.headcount[i]) - fluid_headcount_(i))
              / sqrt_n_;
        workload += theta_(i) * x_hat;
    }
    return minimizer_(workload);
}

Decision TrackingPolicy::on_arrival(SimState const& state, int cls,
                                    StreamRng& /*rng*/) const
{
    // Only pools below the class; never jbar(i), even when it idles.
    for (int j : labeling_.child_pools[cls])
    {
        if (state.idle[j] > 0)
            return Decision::route(j);
    }
    return Decision::enqueue();
}

Decision TrackingPolicy::on_completion(SimState const& state, int pool,
                                       StreamRng& /*rng*/) const
{
    auto const& below = labeling_.child_classes[pool];
    bool any_waiting = false;
    for (int k : below)
        any_waiting = any_waiting || state.queue[k] > 0;
    if (any_waiting)
    {
        Eigen::VectorXd const check = target(state);
        for (int k : below)
        {
            if (state.queue[k] > 0
                && static_cast<double>(state.queue[k]) / sqrt_n_ > check(k))
            {
                return Decision::admit(k);
            }
        }
    }
    int const above = labeling_.parent_class[pool];
    if (above >= 0 && state.queue[above] > 0)
        return Decision::admit(above);
    return Decision::idle();
}

bool TrackingPolicy::invariant_holds(SimState const& state) const
{
    int const J = static_cast<int>(state.idle.size());
    std::vector<bool> all_waiting(J, true);
    for (auto const& e : basic_)
    {
        if (state.queue[e.cls] == 0)
            all_waiting[e.pool] = false;
    }
    for (int j = 0; j < J; ++j)
    {
        if (all_waiting[j] && state.idle[j] != 0)
            return false;
    }
    return true;
}

//---------------------------------------------------------------------------//
// Baselines
//---------------------------------------------------------------------------//

namespace
{
Decision baseline_arrival(PolicyKind kind, std::vector<int> const& pools,
                          SimState const& state, StreamRng& rng)
{
    if (kind == PolicyKind::random)
    {
        std::vector<int> open;
        for (int j : pools)
        {
            if (state.idle[j] > 0)
                open.push_back(j);
        }
        if (open.empty())
            return Decision::enqueue();
        if (open.size() == 1)
            return Decision::route(open.front());
        auto const pick = rng() % open.size();
        return Decision::route(open[pick]);
    }
    for (int j : pools)
    {
        if (state.idle[j] > 0)
            return Decision::route(j);
    }
    return Decision::enqueue();
}

Decision baseline_completion(PolicyKind kind, std::vector<int> const& classes,
                             SimState const& state, StreamRng& rng)
{
    switch (kind)
    {
        case PolicyKind::greedy:
        {
            int best = -1;
            for (int i : classes)
            {
                if (state.queue[i] > 0
                    && (best < 0 || state.queue[i] > state.queue[best]))
                {
                    best = i;
                }
            }
            return best < 0 ? Decision::idle() : Decision::admit(best);
        }
        case PolicyKind::fifo:
        {
            int best = -1;
            for (int i : classes)
            {
                if (state.queue[i] == 0)
                    continue;
                if (best < 0
                    || state.waiting[i].front() < state.waiting[best].front())
                {
                    best = i;
                }
            }
            return best < 0 ? Decision::idle() : Decision::admit(best);
        }
        case PolicyKind::random:
        {
            std::vector<int> ready;
            for (int i : classes)
            {
                if (state.queue[i] > 0)
                    ready.push_back(i);
            }
            if (ready.empty())
                return Decision::idle();
            if (ready.size() == 1)
                return Decision::admit(ready.front());
            auto const pick = rng() % ready.size();
            return Decision::admit(ready[pick]);
        }
        case PolicyKind::tracking:
            break;
    }
    throw ConfigError("baseline_decide: tracking is not a baseline");
}

void compatibility_lists(Topology const& topology,
                         std::vector<std::vector<int>>& class_pools,
                         std::vector<std::vector<int>>& pool_classes)
{
    class_pools.assign(topology.classes, {});
    pool_classes.assign(topology.pools, {});
    for (auto const& e : topology.edges)
    {
        class_pools[e.cls].push_back(e.pool);
        pool_classes[e.pool].push_back(e.cls);
    }
    for (auto& v : class_pools)
        std::sort(v.begin(), v.end());
    for (auto& v : pool_classes)
        std::sort(v.begin(), v.end());
}
}  // namespace

BaselinePolicy::BaselinePolicy(PolicyKind kind, Topology const& topology)
    : kind_(kind)
{
    if (kind == PolicyKind::tracking)
        throw ConfigError("BaselinePolicy: tracking is not a baseline");
    compatibility_lists(topology, class_pools_, pool_classes_);
}

Decision BaselinePolicy::on_arrival(SimState const& state, int cls,
                                    StreamRng& rng) const
{
    return baseline_arrival(kind_, class_pools_[cls], state, rng);
}

Decision BaselinePolicy::on_completion(SimState const& state, int pool,
                                       StreamRng& rng) const
{
    return baseline_completion(kind_, pool_classes_[pool], state, rng);
}

Decision baseline_decide(PolicyKind kind, Topology const& topology,
                         SimState const& state, bool arrival, int index,
                         StreamRng& rng)
{
    BaselinePolicy const policy(kind, topology);
    return arrival ? policy.on_arrival(state, index, rng)
                   : policy.on_completion(state, index, rng);
}

std::unique_ptr<Policy> make_policy(PolicySettings const& settings,
                                    Model const& model,
                                    SystemInstance const& instance,
                                    FluidSolution const& fluid,
                                    CostSpec const& cost)
{
    if (settings.kind != PolicyKind::tracking)
        return std::make_unique<BaselinePolicy>(settings.kind, model.topology);
    if (!fluid.ready())
        throw ModelError("tracking policy needs heavy traffic and complete "
                         "resource pooling");
    return std::make_unique<TrackingPolicy>(
        model.topology, instance, fluid,
        PerturbedMinimizer(cost,
                           minimizer_params(settings, instance, fluid, cost)));
}

MinimizerParams minimizer_params(PolicySettings const& settings,
                                 SystemInstance const& instance,
                                 FluidSolution const& fluid,
                                 CostSpec const& cost)
{
    MinimizerParams mp;
    mp.theta = fluid.theta;
    mp.root = settings.root.value_or(default_root(cost, fluid.theta));
    mp.kappa = settings.kappa.kappa(instance.n);
    mp.kappa_bar = settings.kappa.kappa_bar(instance.n);
    return mp;
}

}  // namespace ndslab
