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
#include "mfdeepc/config.hpp"

#include <set>

namespace mfdeepc {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <typename T>
void read_into(const json& j, const std::string& key, const std::string& where, T& out)
{
    if (j.contains(key)) {
        out = get<T>(j, key, where);
    }
}

Index positive_index(const json& j, const std::string& key, const std::string& where)
{
    const auto v = get<long long>(j, key, where);
    if (v < 1) {
        throw ConfigError(where + "." + key + " must be >= 1");
    }
    return static_cast<Index>(v);
}

} // namespace

ExperimentConfig parse_config(const json& j)
{
    check_keys(j,
               {"seed", "solver", "instance", "al", "lbfgs", "gd", "minres", "instance_file", "seeds", "methods",
                "max_iterations", "n_values", "m_L", "repeats", "steps"},
               "config");
    ExperimentConfig cfg;
    if (j.contains("seed")) {
        cfg.seed = get<std::uint64_t>(j, "seed", "config");
    }
    if (j.contains("solver")) {
        cfg.solver = parse_solver(get<std::string>(j, "solver", "config"));
    }
    if (j.contains("instance")) {
        cfg.instance = j["instance"];
        check_keys(cfg.instance, {"n", "m", "L", "N", "tracking", "spectral_radius", "density"}, "instance");
    }
    if (j.contains("al")) {
        const json& a = j["al"];
        check_keys(a, {"mu0", "mu_delta", "inner_tol", "outer_tol", "max_outer", "max_total_inner"}, "al");
        AlConfig& al = cfg.settings.al;
        read_into(a, "mu0", "al", al.mu0);
        read_into(a, "mu_delta", "al", al.mu_delta);
        read_into(a, "inner_tol", "al", al.inner_tol);
        if (a.contains("outer_tol")) {
            al.outer_tol = get<double>(a, "outer_tol", "al");
        }
        if (a.contains("max_outer")) {
            al.max_outer = positive_index(a, "max_outer", "al");
        }
        if (a.contains("max_total_inner")) {
            al.max_total_inner = positive_index(a, "max_total_inner", "al");
        }
        try {
            al.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("lbfgs")) {
        const json& l = j["lbfgs"];
        check_keys(l, {"window", "max_inner", "gradient_refresh"}, "lbfgs");
        LbfgsConfig& lb = cfg.settings.lbfgs;
        if (l.contains("window")) {
            lb.window = positive_index(l, "window", "lbfgs");
        }
        if (l.contains("max_inner")) {
            lb.max_inner = positive_index(l, "max_inner", "lbfgs");
        }
        if (l.contains("gradient_refresh")) {
            lb.gradient_refresh = positive_index(l, "gradient_refresh", "lbfgs");
        }
    }
    if (j.contains("gd")) {
        check_keys(j["gd"], {"max_inner"}, "gd");
        if (j["gd"].contains("max_inner")) {
            cfg.settings.gd_max_inner = positive_index(j["gd"], "max_inner", "gd");
        }
    }
    if (j.contains("minres")) {
        const json& r = j["minres"];
        check_keys(r, {"tol", "max_iter"}, "minres");
        read_into(r, "tol", "minres", cfg.settings.minres_tol);
        if (!(cfg.settings.minres_tol > 0.0)) {
            throw ConfigError("minres.tol must be positive");
        }
        if (r.contains("max_iter")) {
            cfg.settings.minres_max_iter = positive_index(r, "max_iter", "minres");
        }
    }
    if (j.contains("instance_file")) {
        cfg.instance_file = get<std::string>(j, "instance_file", "config");
    }
    read_into(j, "seeds", "config", cfg.seeds);
    if (j.contains("methods")) {
        cfg.methods_given = true;
        for (const std::string& name : get<std::vector<std::string>>(j, "methods", "config")) {
            cfg.methods.push_back(parse_solver(name));
        }
    }
    if (j.contains("max_iterations")) {
        cfg.max_iterations = positive_index(j, "max_iterations", "config");
    }
    if (j.contains("n_values")) {
        for (const long long n : get<std::vector<long long>>(j, "n_values", "config")) {
            if (n < 1) {
                throw ConfigError("config.n_values entries must be >= 1");
            }
            cfg.n_values.push_back(static_cast<Index>(n));
        }
        if (cfg.n_values.empty()) {
            throw ConfigError("config.n_values must be non-empty");
        }
    }
    if (j.contains("m_L")) {
        for (const auto& pair : get<std::vector<std::vector<long long>>>(j, "m_L", "config")) {
            if (pair.size() != 2 || pair[0] < 1 || pair[1] < 1) {
                throw ConfigError("config.m_L entries must be [m, L] pairs of positive integers");
            }
            cfg.m_horizon.emplace_back(static_cast<Index>(pair[0]), static_cast<Index>(pair[1]));
        }
        if (cfg.m_horizon.empty()) {
            throw ConfigError("config.m_L must be non-empty");
        }
    }
    if (j.contains("repeats")) {
        cfg.repeats = positive_index(j, "repeats", "config");
    }
    if (j.contains("steps")) {
        cfg.steps = positive_index(j, "steps", "config");
    }
    return cfg;
}

InstanceSpec instance_spec(const ExperimentConfig& cfg, const InstanceSpec& defaults)
{
    InstanceSpec spec = defaults;
    const json& j = cfg.instance;
    if (j.contains("n")) {
        spec.n = positive_index(j, "n", "instance");
    }
    if (j.contains("m")) {
        spec.m = positive_index(j, "m", "instance");
    }
    if (j.contains("L")) {
        spec.horizon = positive_index(j, "L", "instance");
    }
    if (j.contains("N")) {
        spec.length = positive_index(j, "N", "instance");
    }
    read_into(j, "tracking", "instance", spec.tracking);
    read_into(j, "spectral_radius", "instance", spec.spectral_radius);
    read_into(j, "density", "instance", spec.density);
    if (cfg.seed) {
        spec.seed = *cfg.seed;
    }
    spec.validate();
    return spec;
}

} // namespace mfdeepc
