// SPDX-License-Identifier: Apache-2.0
#include "ndslab/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace ndslab
{

int Topology::edge_index(int cls, int pool) const
{
    for (std::size_t k = 0; k < edges.size(); ++k)
    {
        if (edges[k].cls == cls && edges[k].pool == pool)
            return static_cast<int>(k);
    }
    return -1;
}

std::string to_string(ArrivalFamily family)
{
    switch (family)
    {
        case ArrivalFamily::exponential:
            return "exponential";
        case ArrivalFamily::deterministic:
            return "deterministic";
        case ArrivalFamily::gamma:
            return "gamma";
        case ArrivalFamily::lognormal:
            return "lognormal";
    }
    return "unknown";
}

ArrivalFamily parse_arrival_family(std::string const& name)
{
    if (name == "exponential")
        return ArrivalFamily::exponential;
    if (name == "deterministic")
        return ArrivalFamily::deterministic;
    if (name == "gamma")
        return ArrivalFamily::gamma;
    if (name == "lognormal")
        return ArrivalFamily::lognormal;
    throw ConfigError("unknown interarrival family '" + name + "'");
}

ValidationReport
validate_topology(Topology const& topology, BaseParameters const& params)
{
    ValidationReport report;
    auto add = [&report](auto&&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        report.findings.push_back(os.str());
    };

    int const I = topology.classes;
    int const J = topology.pools;
    if (I <= 0 || J <= 0)
    {
        add("topology needs at least one class and one pool");
        return report;
    }

    std::set<std::pair<int, int>> seen;
    std::vector<int> class_degree(I, 0), pool_degree(J, 0);
    for (auto const& e : topology.edges)
    {
        if (e.cls < 0 || e.cls >= I || e.pool < 0 || e.pool >= J)
        {
            add("edge (", e.cls + 1, ",", e.pool + 1, ") out of range");
            continue;
        }
        if (!seen.insert({e.cls, e.pool}).second)
            add("duplicate edge (", e.cls + 1, ",", e.pool + 1, ")");
        ++class_degree[e.cls];
        ++pool_degree[e.pool];
    }
    for (int i = 0; i < I; ++i)
    {
        if (class_degree[i] == 0)
            add("isolated class ", i + 1);
    }
    for (int j = 0; j < J; ++j)
    {
        if (pool_degree[j] == 0)
            add("isolated pool ", j + 1);
    }

    if (params.lambda.size() != I || params.lambda_hat.size() != I
        || params.c_ia.size() != I
        || static_cast<int>(params.family.size()) != I)
    {
        add("per-class parameter vectors must have length ", I);
        return report;
    }
    if (params.nu.size() != J)
    {
        add("nu must have length ", J);
        return report;
    }
    if (params.mu_bar.rows() != I || params.mu_bar.cols() != J
        || params.mu_hat.rows() != I || params.mu_hat.cols() != J)
    {
        add("rate matrices must be ", I, "x", J);
        return report;
    }

    for (int i = 0; i < I; ++i)
    {
        if (!(params.lambda(i) > 0))
            add("non-positive arrival rate for class ", i + 1);
        double const c = params.c_ia(i);
        if (!(c >= 0))
            add("negative interarrival CV for class ", i + 1);
        switch (params.family[i])
        {
            case ArrivalFamily::deterministic:
                if (c != 0)
                    add("deterministic arrivals need c_ia = 0 (class ", i + 1,
                        ")");
                break;
            case ArrivalFamily::exponential:
                if (c != 1)
                    add("exponential arrivals need c_ia = 1 (class ", i + 1,
                        ")");
                break;
            default:
                if (!(c > 0))
                    add("gamma/lognormal arrivals need c_ia > 0 (class ",
                        i + 1, ")");
                break;
        }
    }
    for (int j = 0; j < J; ++j)
    {
        if (!(params.nu(j) > 0))
            add("non-positive size coefficient for pool ", j + 1);
    }
    for (int i = 0; i < I; ++i)
    {
        for (int j = 0; j < J; ++j)
        {
            bool const edge = seen.count({i, j}) > 0;
            double const m = params.mu_bar(i, j);
            if (edge && !(m > 0))
                add("zero rate on edge (", i + 1, ",", j + 1, ")");
            if (!edge && (m != 0 || params.mu_hat(i, j) != 0))
                add("nonzero rate off the edge set at (", i + 1, ",", j + 1,
                    ")");
        }
    }
    return report;
}

SystemInstance build_instance(BaseParameters const& params,
                              Topology const& topology, long n)
{
    if (n < 1)
        throw ModelError("scale index n must be positive");
    int const I = topology.classes;
    int const J = topology.pools;

    SystemInstance inst;
    inst.n = n;
    inst.sqrt_n = std::sqrt(static_cast<double>(n));
    double const dn = static_cast<double>(n);

    inst.arrival_rate = dn * params.lambda + inst.sqrt_n * params.lambda_hat;
    for (int i = 0; i < I; ++i)
    {
        if (!(inst.arrival_rate(i) > 0))
            throw ModelError("arrival rate of class " + std::to_string(i + 1)
                             + " is not positive at this n");
    }

    inst.servers.resize(J);
    for (int j = 0; j < J; ++j)
    {
        long const N = std::lround(params.nu(j) * inst.sqrt_n);
        if (N < 1)
        {
            std::ostringstream os;
            os << "pool vanishes at this n: pool " << j + 1 << " has "
               << "round(" << params.nu(j) << " * sqrt(" << n << ")) = 0";
            throw ModelError(os.str());
        }
        inst.servers[j] = static_cast<int>(N);
    }

    inst.service_rate = Eigen::MatrixXd::Zero(I, J);
    inst.rate_deviation = Eigen::MatrixXd::Zero(I, J);
    for (auto const& e : topology.edges)
    {
        double const total = dn * params.mu_bar(e.cls, e.pool)
                             + inst.sqrt_n * params.mu_hat(e.cls, e.pool);
        double const rate = total / inst.servers[e.pool];
        if (!(rate > 0))
        {
            std::ostringstream os;
            os << "service rate on edge (" << e.cls + 1 << "," << e.pool + 1
               << ") is not positive at n = " << n;
            throw ModelError(os.str());
        }
        inst.service_rate(e.cls, e.pool) = rate;
        inst.rate_deviation(e.cls, e.pool)
            = rate / inst.sqrt_n - params.per_server_rate(e.cls, e.pool);
    }
    return inst;
}

}  // namespace ndslab
