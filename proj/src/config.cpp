// SPDX-License-Identifier: Apache-2.0
#include "ndslab/config.hpp"

#include <fstream>
#include <sstream>

namespace ndslab
{
namespace
{
using nlohmann::json;

json const& require(json const& obj, char const* key, char const* where)
{
    if (!obj.is_object() || !obj.contains(key))
    {
        throw ConfigError(std::string("missing '") + key + "' in " + where);
    }
    return obj.at(key);
}

Eigen::VectorXd vector_of(json const& v, int size, char const* what)
{
    Eigen::VectorXd out(size);
    if (v.is_number())
    {
        out.setConstant(v.get<double>());
        return out;
    }
    if (!v.is_array() || static_cast<int>(v.size()) != size)
    {
        std::ostringstream os;
        os << "'" << what << "' must be a number or an array of length "
           << size;
        throw ConfigError(os.str());
    }
    for (int k = 0; k < size; ++k)
        out(k) = v.at(k).get<double>();
    return out;
}

KappaSchedule parse_kappa(json const& policy, KappaSchedule base)
{
    if (policy.contains("kappa"))
    {
        auto const& k = policy.at("kappa");
        base.kappa_scale = k.value("scale", base.kappa_scale);
        base.kappa_exponent = k.value("exponent", base.kappa_exponent);
    }
    if (policy.contains("kappa_bar"))
    {
        auto const& k = policy.at("kappa_bar");
        base.kappa_bar_scale = k.value("scale", base.kappa_bar_scale);
        base.kappa_bar_exponent = k.value("exponent", base.kappa_bar_exponent);
    }
    return base;
}

CostSpec parse_cost(json const& c, int classes)
{
    std::string const kind = c.value("kind", "linear");
    if (kind == "linear")
    {
        return CostSpec::linear(
            vector_of(c.value("coefficients", json(1.0)), classes,
                      "cost.coefficients"));
    }
    if (kind == "separable_power")
    {
        return CostSpec::separable_power(
            vector_of(c.value("coefficients", json(1.0)), classes,
                      "cost.coefficients"),
            c.value("exponent", 2.0));
    }
    if (kind == "quadratic_form")
    {
        auto const& m = require(c, "matrix", "cost");
        if (!m.is_array() || static_cast<int>(m.size()) != classes)
            throw ConfigError("cost.matrix must be classes x classes");
        Eigen::MatrixXd mat(classes, classes);
        for (int i = 0; i < classes; ++i)
            mat.row(i) = vector_of(m.at(i), classes, "cost.matrix row");
        return CostSpec::quadratic_form(mat);
    }
    throw ConfigError("unknown cost kind '" + kind + "'");
}
}  // namespace

ModelFile parse_model(nlohmann::json const& doc)
{
    try
    {
        ModelFile file;
        auto& model = file.model;
        model.name = doc.value("name", "model");

        auto const& topo = require(doc, "topology", "model file");
        model.topology.classes = require(topo, "classes", "topology").get<int>();
        model.topology.pools = require(topo, "pools", "topology").get<int>();
        int const I = model.topology.classes;
        int const J = model.topology.pools;
        if (I <= 0 || J <= 0)
            throw ConfigError("topology needs positive class and pool counts");
        for (auto const& e : require(topo, "edges", "topology"))
        {
            if (!e.is_array() || e.size() != 2)
                throw ConfigError("edges must be [class, pool] pairs");
            model.topology.edges.push_back(
                {e.at(0).get<int>() - 1, e.at(1).get<int>() - 1});
        }
        int const K = model.topology.edge_count();

        auto& p = model.params;
        auto const& first = require(doc, "first_order", "model file");
        p.lambda = vector_of(require(first, "lambda", "first_order"), I,
                             "lambda");
        p.nu = vector_of(require(first, "nu", "first_order"), J, "nu");
        Eigen::VectorXd const mu_bar
            = vector_of(require(first, "mu_bar", "first_order"), K, "mu_bar");

        json const second = doc.value("second_order", json::object());
        p.lambda_hat
            = vector_of(second.value("lambda_hat", json(0.0)), I, "lambda_hat");
        Eigen::VectorXd const mu_hat
            = vector_of(second.value("mu_hat", json(0.0)), K, "mu_hat");

        p.mu_bar = Eigen::MatrixXd::Zero(I, J);
        p.mu_hat = Eigen::MatrixXd::Zero(I, J);
        for (int k = 0; k < K; ++k)
        {
            auto const& e = model.topology.edges[k];
            if (e.cls < 0 || e.cls >= I || e.pool < 0 || e.pool >= J)
                throw ConfigError("edge index out of range");
            p.mu_bar(e.cls, e.pool) = mu_bar(k);
            p.mu_hat(e.cls, e.pool) = mu_hat(k);
        }

        json const arrivals = doc.value("arrivals", json::object());
        json const family = arrivals.value("family", json("exponential"));
        p.family.clear();
        for (int i = 0; i < I; ++i)
        {
            std::string const name = family.is_array()
                                         ? family.at(i).get<std::string>()
                                         : family.get<std::string>();
            p.family.push_back(parse_arrival_family(name));
        }
        if (arrivals.contains("c_ia"))
        {
            p.c_ia = vector_of(arrivals.at("c_ia"), I, "c_ia");
        }
        else
        {
            p.c_ia.resize(I);
            for (int i = 0; i < I; ++i)
            {
                p.c_ia(i) = p.family[i] == ArrivalFamily::deterministic ? 0.0
                                                                        : 1.0;
            }
        }

        auto const report = validate_topology(model.topology, p);
        if (!report.ok())
        {
            std::ostringstream os;
            os << "invalid model:";
            for (auto const& f : report.findings)
                os << "\n  - " << f;
            throw ConfigError(os.str());
        }

        file.cost = parse_cost(doc.value("cost", json::object()), I);

        json const policy = doc.value("policy", json::object());
        if (policy.contains("root"))
        {
            int const root = policy.at("root").get<int>() - 1;
            if (root < 0 || root >= I)
                throw ConfigError("policy.root out of range");
            file.policy.root = root;
        }
        file.policy.kappa = parse_kappa(policy, file.policy.kappa);
        return file;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw ConfigError(std::string("malformed model file: ") + e.what());
    }
}

nlohmann::json read_json_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path.string() + "'");
    try
    {
        return nlohmann::json::parse(in, nullptr, true, true);
    }
    catch (nlohmann::json::exception const& e)
    {
        throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
    }
}

ModelFile load_model_file(std::filesystem::path const& path)
{
    return parse_model(read_json_file(path));
}

nlohmann::json analysis_to_json(ModelFile const& file,
                                FluidSolution const& fluid)
{
    auto const& topo = file.model.topology;
    json out;
    out["model"] = file.model.name;
    json xi = json::array();
    for (auto const& e : topo.edges)
    {
        xi.push_back({{"class", e.cls + 1},
                      {"pool", e.pool + 1},
                      {"xi", fluid.xi(e.cls, e.pool)}});
    }
    out["xi"] = xi;
    out["rho"] = fluid.rho;
    json basic = json::array();
    for (auto const& e : fluid.basic.edges)
        basic.push_back({e.cls + 1, e.pool + 1});
    out["basic_activities"] = basic;
    out["heavy_traffic"] = fluid.basic.heavy_traffic;
    out["resource_pooling"] = fluid.basic.resource_pooling;
    out["tree"] = fluid.basic.tree;
    out["uniqueness_certified"] = fluid.basic.uniqueness_certified;
    out["notes"] = fluid.basic.notes;

    auto to_array = [](Eigen::VectorXd const& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    if (fluid.ready())
    {
        out["theta"] = to_array(fluid.theta);
        out["z"] = to_array(fluid.z);
        out["drift"] = to_array(fluid.drift);
        out["sigma"] = to_array(fluid.sigma);
        auto const check = check_cost(file.cost, fluid.theta, 10.0);
        out["cost"] = {{"kind", file.cost.label()},
                       {"monotone", check.monotone},
                       {"nonnegative_at_zero", check.nonnegative_at_zero},
                       {"reduced_cost_convex", check.reduced_convex}};
    }
    return out;
}

}  // namespace ndslab
