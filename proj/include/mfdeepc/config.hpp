/*
 Copyright 2026 The mfdeepc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef MFDEEPC_CONFIG_HPP
#define MFDEEPC_CONFIG_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfdeepc/experiments.hpp"

namespace mfdeepc {

/// Parsed experiment configuration: JSON file first, then command-line overrides.
///
///     {
///       "seed": 1,
///       "solver": "al-lbfgs",
///       "instance": {"n": 4, "m": 2, "L": 5, "N": 120, "tracking": false,
///                    "spectral_radius": 0.9, "density": 0.5},
///       "al": {"mu0": 1, "mu_delta": 10, "inner_tol": 1e-7, "outer_tol": 1e-6,
///              "max_outer": 100, "max_total_inner": 100000},
///       "lbfgs": {"window": 30, "max_inner": 100000, "gradient_refresh": 50},
///       "gd": {"max_inner": 100000},
///       "minres": {"tol": 1e-9, "max_iter": 100000},
///       "instance_file": "instance.json",
///       "seeds": [1, 2, 3],
///       "methods": ["al-lbfgs", "al-gd", "minres"],
///       "max_iterations": 20000,
///       "n_values": [64, 128], "m_L": [[50, 50]], "repeats": 3,
///       "steps": 50
///     }
///
/// Every key is optional; commands fill in their own defaults.
struct ExperimentConfig {
    std::optional<std::uint64_t> seed;
    std::optional<SolverKind> solver;
    nlohmann::json instance = nlohmann::json::object();
    SolverSettings settings;
    std::optional<std::string> instance_file;
    std::vector<std::uint64_t> seeds;
    std::vector<SolverKind> methods;
    bool methods_given = false;
    std::optional<Index> max_iterations;
    std::vector<Index> n_values;
    std::vector<std::pair<Index, Index>> m_horizon;
    std::optional<Index> repeats;
    std::optional<Index> steps;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Instance section merged over the given defaults.
InstanceSpec instance_spec(const ExperimentConfig& cfg, const InstanceSpec& defaults);

} // namespace mfdeepc

#endif // MFDEEPC_CONFIG_HPP
