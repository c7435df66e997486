// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/cost.hpp"
#include "ndslab/fluid.hpp"
#include "ndslab/model.hpp"
#include "ndslab/policy.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace ndslab
{

//---------------------------------------------------------------------------//
/*!
 * A model file: topology, parameters, cost and policy overrides.
 *
 * Files are JSON with one-based class/pool indices:
 * \code
 * {
 *   "topology":     {"classes": 2, "pools": 2, "edges": [[1,1],[1,2],[2,2]]},
 *   "first_order":  {"lambda": [1.2, 1.6], "nu": [1, 1], "mu_bar": [1, 1, 2]},
 *   "second_order": {"lambda_hat": [0, 0], "mu_hat": [0, 0, 0]},
 *   "arrivals":     {"family": "exponential", "c_ia": 1},
 *   "cost":         {"kind": "linear", "coefficients": [1, 1]},
 *   "policy":       {"root": 1, "kappa": {"scale": 1, "exponent": 0.05}}
 * }
 * \endcode
 * Per-edge arrays follow the order of `edges`.
 */
struct ModelFile
{
    Model model;
    CostSpec cost;
    PolicySettings policy;
};

ModelFile parse_model(nlohmann::json const& doc);
ModelFile load_model_file(std::filesystem::path const& path);

nlohmann::json read_json_file(std::filesystem::path const& path);

// Fluid analysis as JSON with one-based indices.
nlohmann::json analysis_to_json(ModelFile const& file,
                                FluidSolution const& fluid);

}  // namespace ndslab
