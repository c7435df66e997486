// SPDX-License-Identifier: Apache-2.0
#include "ndslab/fluid.hpp"

#include "ndslab/simplex.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace ndslab
{
namespace
{
// Nodes 0..I-1 are classes, I..I+J-1 are pools.
int count_components(int classes, int pools,
                     std::vector<Activity> const& edges)
{
    std::vector<int> parent(classes + pools);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int v) {
        while (parent[v] != v)
        {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    int components = classes + pools;
    for (auto const& e : edges)
    {
        int const a = find(e.cls);
        int const b = find(classes + e.pool);
        if (a != b)
        {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

bool has_cycle(int classes, int pools, std::vector<Activity> const& edges)
{
    return static_cast<int>(edges.size())
           > classes + pools - count_components(classes, pools, edges);
}

// Solves pool saturation and class balance on a forest by leaf peeling.
Eigen::MatrixXd solve_forest_flows(int classes, int pools,
                                   std::vector<Activity> const& edges,
                                   Eigen::VectorXd const& lambda,
                                   Eigen::MatrixXd const& mu_bar,
                                   double saturation)
{
    int const V = classes + pools;
    std::vector<std::vector<int>> incident(V);
    for (int k = 0; k < static_cast<int>(edges.size()); ++k)
    {
        incident[edges[k].cls].push_back(k);
        incident[classes + edges[k].pool].push_back(k);
    }
    std::vector<bool> solved(edges.size(), false);
    std::vector<int> open(V);
    for (int v = 0; v < V; ++v)
        open[v] = static_cast<int>(incident[v].size());

    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(classes, pools);
    std::size_t remaining = edges.size();
    bool progress = true;
    while (remaining > 0 && progress)
    {
        progress = false;
        for (int v = 0; v < V; ++v)
        {
            if (open[v] != 1)
                continue;
            int edge = -1;
            double residual
                = v < classes ? lambda(v) : saturation;
            for (int k : incident[v])
            {
                auto const& e = edges[k];
                double const w = v < classes ? mu_bar(e.cls, e.pool) : 1.0;
                if (solved[k])
                    residual -= w * xi(e.cls, e.pool);
                else
                    edge = k;
            }
            auto const& e = edges[edge];
            double const w = v < classes ? mu_bar(e.cls, e.pool) : 1.0;
            xi(e.cls, e.pool) = residual / w;
            solved[edge] = true;
            --remaining;
            --open[e.cls];
            --open[classes + e.pool];
            progress = true;
        }
    }
    return xi;
}
}  // namespace

StaticLpSolution solve_static_lp(Topology const& topology,
                                 Eigen::VectorXd const& lambda,
                                 Eigen::MatrixXd const& mu_bar)
{
    int const I = topology.classes;
    int const J = topology.pools;
    int const K = topology.edge_count();

    // Columns: xi_e (K), rho, load slack s_j (J), capacity slack t_j (J).
    int const rho_col = K;
    int const cols = K + 1 + 2 * J;
    int const rows = I + 2 * J;

    StandardFormLp lp;
    lp.A = Eigen::MatrixXd::Zero(rows, cols);
    lp.b = Eigen::VectorXd::Zero(rows);
    lp.c = Eigen::VectorXd::Zero(cols);
    lp.c(rho_col) = 1.0;

    for (int k = 0; k < K; ++k)
    {
        auto const& e = topology.edges[k];
        lp.A(e.cls, k) = mu_bar(e.cls, e.pool);
        lp.A(I + e.pool, k) = 1.0;
        lp.A(I + J + e.pool, k) = 1.0;
    }
    for (int i = 0; i < I; ++i)
        lp.b(i) = lambda(i);
    for (int j = 0; j < J; ++j)
    {
        lp.A(I + j, rho_col) = -1.0;
        lp.A(I + j, K + 1 + j) = 1.0;
        lp.A(I + J + j, K + 1 + J + j) = 1.0;
        lp.b(I + J + j) = 1.0;
    }

    LpResult const res = solve_simplex(lp);
    if (res.status != LpStatus::optimal)
        throw ModelError("overloaded: no balanced allocation");

    StaticLpSolution out;
    out.xi = Eigen::MatrixXd::Zero(I, J);
    for (int k = 0; k < K; ++k)
    {
        auto const& e = topology.edges[k];
        out.xi(e.cls, e.pool) = res.x(k);
    }
    out.rho = res.x(rho_col);
    return out;
}

BasicTree extract_basic_tree(Topology const& topology,
                             Eigen::VectorXd const& lambda,
                             Eigen::MatrixXd const& mu_bar,
                             StaticLpSolution const& lp, double tol)
{
    int const I = topology.classes;
    int const J = topology.pools;
    BasicTree out;
    for (auto const& e : topology.edges)
    {
        if (lp.xi(e.cls, e.pool) > tol)
            out.edges.push_back(e);
    }

    int const components = count_components(I, J, out.edges);
    out.resource_pooling = components == 1;
    out.tree = out.resource_pooling
               && static_cast<int>(out.edges.size()) == I + J - 1;

    bool critical = std::abs(lp.rho - 1.0) <= tol;
    if (!critical)
    {
        std::ostringstream os;
        os << "rho* = " << lp.rho << " differs from 1";
        out.notes.push_back(os.str());
    }
    for (int j = 0; j < J; ++j)
    {
        double const load = lp.xi.col(j).sum();
        if (std::abs(load - 1.0) > tol)
        {
            critical = false;
            std::ostringstream os;
            os << "pool " << j + 1 << " not saturated (load " << load << ")";
            out.notes.push_back(os.str());
        }
    }

    if (has_cycle(I, J, out.edges))
    {
        out.notes.push_back("uniqueness not certified: basic graph has a "
                            "cycle");
    }
    else
    {
        Eigen::MatrixXd const flows = solve_forest_flows(
            I, J, out.edges, lambda, mu_bar, lp.rho);
        double const err = (flows - lp.xi).cwiseAbs().maxCoeff();
        out.uniqueness_certified = err <= 1e-9;
        if (!out.uniqueness_certified)
        {
            std::ostringstream os;
            os << "uniqueness not certified: tree flows deviate by " << err;
            out.notes.push_back(os.str());
        }
    }
    out.heavy_traffic = critical && out.uniqueness_certified;
    if (!out.resource_pooling)
    {
        std::ostringstream os;
        os << "basic graph has " << components << " components";
        out.notes.push_back(os.str());
    }
    return out;
}

WorkloadDirection compute_theta(int classes, int pools,
                                std::vector<Activity> const& tree,
                                Eigen::MatrixXd const& mu_bar)
{
    if (static_cast<int>(tree.size()) != classes + pools - 1
        || count_components(classes, pools, tree) != 1)
    {
        throw ModelError("compute_theta: basic activities do not form a "
                         "spanning tree");
    }

    int const V = classes + pools;
    std::vector<std::vector<int>> adjacent(V);
    for (auto const& e : tree)
    {
        adjacent[e.cls].push_back(classes + e.pool);
        adjacent[classes + e.pool].push_back(e.cls);
    }

    // value[v] is theta_i for classes and z_j for pools.
    std::vector<double> value(V, 0.0);
    std::vector<bool> seen(V, false);
    std::queue<int> frontier;
    value[0] = 1.0;
    seen[0] = true;
    frontier.push(0);
    while (!frontier.empty())
    {
        int const v = frontier.front();
        frontier.pop();
        for (int w : adjacent[v])
        {
            if (seen[w])
                continue;
            seen[w] = true;
            if (v < classes)
                value[w] = value[v] * mu_bar(v, w - classes);
            else
                value[w] = value[v] / mu_bar(w, v - classes);
            frontier.push(w);
        }
    }

    WorkloadDirection out;
    out.theta = Eigen::Map<Eigen::VectorXd>(value.data(), classes);
    out.z = Eigen::Map<Eigen::VectorXd>(value.data() + classes, pools);
    double const norm = out.theta.norm();
    out.theta /= norm;
    out.z /= norm;
    return out;
}

DiffusionCoefficients compute_diffusion_params(BaseParameters const& params,
                                               Eigen::MatrixXd const& xi)
{
    DiffusionCoefficients out;
    out.drift = params.lambda_hat
                - params.mu_hat.cwiseProduct(xi).rowwise().sum();
    Eigen::VectorXd const service
        = params.mu_bar.cwiseProduct(xi).rowwise().sum();
    out.sigma = (params.lambda.cwiseProduct(params.c_ia.cwiseAbs2()) + service)
                    .cwiseSqrt();
    return out;
}

Eigen::VectorXd
FluidSolution::fluid_headcount(std::vector<int> const& servers) const
{
    Eigen::VectorXd n(servers.size());
    for (std::size_t j = 0; j < servers.size(); ++j)
        n(j) = servers[j];
    return xi * n;
}

FluidSolution analyze(Model const& model, double tol)
{
    auto const& topo = model.topology;
    auto const& params = model.params;

    FluidSolution out;
    StaticLpSolution const lp
        = solve_static_lp(topo, params.lambda, params.mu_bar);
    out.xi = lp.xi;
    out.rho = lp.rho;
    out.basic = extract_basic_tree(topo, params.lambda, params.mu_bar, lp, tol);
    if (out.ready())
    {
        auto const w = compute_theta(topo.classes, topo.pools,
                                     out.basic.edges, params.mu_bar);
        out.theta = w.theta;
        out.z = w.z;
        auto const d = compute_diffusion_params(params, out.xi);
        out.drift = d.drift;
        out.sigma = d.sigma;
    }
    return out;
}

}  // namespace ndslab
