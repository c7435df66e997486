// SPDX-License-Identifier: Apache-2.0
#include "ndslab/state.hpp"

namespace ndslab
{

SimState SimState::empty(Topology const& topology)
{
    SimState s;
    s.headcount.assign(topology.classes, 0);
    s.queue.assign(topology.classes, 0);
    s.busy.assign(topology.edge_count(), 0);
    s.idle.assign(topology.pools, 0);
    s.waiting.assign(topology.classes, {});
    s.serving.assign(topology.edge_count(), {});
    return s;
}

int count_state_violations(SimState const& state, Topology const& topology,
                           std::vector<int> const& servers)
{
    int violations = 0;
    std::vector<long> in_service(topology.classes, 0);
    std::vector<long> pool_busy(topology.pools, 0);
    for (int k = 0; k < topology.edge_count(); ++k)
    {
        auto const& e = topology.edges[k];
        long const b = state.busy[k];
        if (b < 0)
            ++violations;
        if (static_cast<long>(state.serving[k].size()) != b)
            ++violations;
        in_service[e.cls] += b;
        pool_busy[e.pool] += b;
    }
    for (int i = 0; i < topology.classes; ++i)
    {
        if (state.queue[i] < 0 || state.headcount[i] < 0)
            ++violations;
        if (state.headcount[i] != state.queue[i] + in_service[i])
            ++violations;
        if (static_cast<long>(state.waiting[i].size()) != state.queue[i])
            ++violations;
    }
    for (int j = 0; j < topology.pools; ++j)
    {
        if (state.idle[j] < 0)
            ++violations;
        if (servers[j] != state.idle[j] + pool_busy[j])
            ++violations;
    }
    return violations;
}

}  // namespace ndslab
