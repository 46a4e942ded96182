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
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfdeepc/config.hpp"
#include "mfdeepc/experiments.hpp"
#include "mfdeepc/io.hpp"

using namespace mfdeepc;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> solver;
    std::string instance;
};

InstanceSpec defaults(Index n, Index m, Index horizon, bool tracking)
{
    InstanceSpec spec;
    spec.n = n;
    spec.m = m;
    spec.horizon = horizon;
    spec.tracking = tracking;
    return spec;
}

int cmd_gen_data(const ExperimentConfig& cfg, const fs::path& out)
{
    const InstanceSpec base = instance_spec(cfg, defaults(4, 2, 5, false));
    if (cfg.seeds.empty()) {
        std::cout << write_instance(out, "instance", make_instance(base)).string() << '\n';
        return 0;
    }
    for (const std::uint64_t seed : cfg.seeds) {
        InstanceSpec spec = base;
        spec.seed = seed;
        std::cout << write_instance(out, "instance_" + std::to_string(seed), make_instance(spec)).string() << '\n';
    }
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg, const Options& opts, const fs::path& out)
{
    const std::string path = !opts.instance.empty() ? opts.instance : cfg.instance_file.value_or("");
    if (path.empty()) {
        throw ConfigError("solve: no instance file (use --instance or instance_file)");
    }
    const Instance inst = read_instance(path);
    const SolverKind kind = cfg.solver.value_or(SolverKind::al_lbfgs);
    const SolveReport rep = run_solver(kind, inst.problem(), cfg.settings, cfg.max_iterations);
    write_report_csv(out / "report.csv", rep);
    json summary = report_summary(rep);
    summary["instance"] = path;
    write_json(out / "report.json", summary);
    std::cout << rep.method << ": " << to_string(rep.status) << ", " << rep.inner_iterations
              << " iterations, residual " << format_double(rep.final_residual) << '\n';
    return rep.status == SolveStatus::converged ? 0 : kExitNotConverged;
}

int cmd_residual_study(const ExperimentConfig& cfg, const fs::path& out)
{
    const Instance inst = make_instance(instance_spec(cfg, defaults(100, 50, 50, false)));
    const std::vector<SolverKind> methods =
        cfg.methods_given ? cfg.methods
                          : std::vector<SolverKind>{SolverKind::al_lbfgs, SolverKind::al_gd, SolverKind::minres};
    const ResidualStudy study = residual_study(inst, methods, cfg.settings, cfg.max_iterations.value_or(20000));
    write_residual_csv(out / "residuals.csv", study.rows);

    json summary;
    summary["n"] = inst.spec.n;
    summary["m"] = inst.spec.m;
    summary["L"] = inst.spec.horizon;
    summary["N"] = inst.length;
    summary["reconstructed"] = {{"N", inst.length_reconstructed}};
    summary["seed"] = inst.spec.seed;
    summary["budget"] = study.budget;
    bool lead_converged = true;
    for (const SolveReport& rep : study.reports) {
        summary["methods"][rep.method] = report_summary(rep);
        std::cout << rep.method << ": " << rep.inner_iterations << " iterations, residual "
                  << format_double(rep.final_residual) << '\n';
        if (rep.method == "al-lbfgs" && rep.status != SolveStatus::converged) {
            lead_converged = false;
        }
    }
    write_json(out / "residual_summary.json", summary);
    return lead_converged ? 0 : kExitNotConverged;
}

int cmd_scaling_study(const ExperimentConfig& cfg, const fs::path& out)
{
    ScalingConfig sc;
    sc.n_values = cfg.n_values.empty() ? std::vector<Index>{64, 128, 256, 512} : cfg.n_values;
    sc.m_horizon = cfg.m_horizon.empty() ? std::vector<std::pair<Index, Index>>{{50, 50}, {100, 100}} : cfg.m_horizon;
    sc.seed = cfg.seed.value_or(1);
    sc.repeats = cfg.repeats.value_or(3);
    sc.max_iterations = cfg.max_iterations;
    sc.solver = cfg.solver.value_or(SolverKind::al_lbfgs);
    sc.settings = cfg.settings;
    const std::vector<ScalingSeries> series = scaling_study(sc);
    write_bench_csv(out / "bench.csv", series);

    json summary = json::array();
    for (const ScalingSeries& s : series) {
        json entry = {{"m", s.m}, {"L", s.horizon}, {"slope_defined", s.slope.has_value()}};
        entry["slope"] = s.slope ? json(*s.slope) : json(nullptr);
        summary.push_back(entry);
        std::cout << "m=" << s.m << " L=" << s.horizon << " slope "
                  << (s.slope ? format_double(*s.slope) : std::string("undefined")) << '\n';
    }
    write_json(out / "scaling_summary.json", summary);
    return 0;
}

int cmd_condition_study(const ExperimentConfig& cfg, const fs::path& out)
{
    const std::vector<Index> ns = cfg.n_values.empty() ? std::vector<Index>{20, 40, 60} : cfg.n_values;
    const auto pairs = cfg.m_horizon.empty() ? std::vector<std::pair<Index, Index>>{{10, 10}} : cfg.m_horizon;
    std::vector<ConditionPoint> points;
    for (const auto& [m, horizon] : pairs) {
        for (const Index n : ns) {
            InstanceSpec spec = defaults(n, m, horizon, false);
            spec.seed = cfg.seed.value_or(1);
            const ConditionPoint pt = condition_study_point(make_instance(spec), cfg.settings);
            std::cout << "n=" << n << " m=" << m << " L=" << horizon << " kappa(S)=" << format_double(pt.kappa_s)
                      << " kappa(BS)=" << format_double(pt.kappa_bs) << '\n';
            points.push_back(pt);
        }
    }
    write_condition_csv(out / "condition.csv", points);
    return 0;
}

int cmd_closed_loop(const ExperimentConfig& cfg, const fs::path& out)
{
    const Instance inst = make_instance(instance_spec(cfg, defaults(4, 2, 6, true)));
    const ClosedLoopResult result = closed_loop(inst, cfg.steps.value_or(50), cfg.settings);
    write_closed_loop_csv(out / "closed_loop.csv", result);
    json summary;
    summary["steps"] = result.steps.size();
    summary["initial_error"] = result.steps.empty() ? 0.0 : result.steps.front().error;
    summary["final_error"] = result.final_error;
    summary["converged"] = result.converged;
    write_json(out / "closed_loop_summary.json", summary);
    std::cout << "final |x - x_s| = " << format_double(result.final_error) << '\n';
    return result.converged ? 0 : kExitNotConverged;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Matrix-free DeePC solvers and experiment harness"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opts;
    app.add_option("--config", opts.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", opts.out, "output directory")->capture_default_str();
    app.add_option("--seed", opts.seed, "master seed (overrides the config)");
    app.add_option("--solver", opts.solver, "al-lbfgs | al-gd | minres (overrides the config)");

    CLI::App* gen = app.add_subcommand("gen-data", "write instance JSON and data trajectory CSV");
    CLI::App* solve = app.add_subcommand("solve", "solve one instance and write a report");
    solve->add_option("--instance", opts.instance, "instance JSON written by gen-data");
    CLI::App* residual = app.add_subcommand("residual-study", "residuals over iterations per method");
    CLI::App* scaling = app.add_subcommand("scaling-study", "iterations and time over an n sweep");
    CLI::App* condition = app.add_subcommand("condition-study", "condition numbers of S and BS");
    CLI::App* loop = app.add_subcommand("closed-loop", "receding-horizon setpoint tracking demo");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        ExperimentConfig cfg = opts.config.empty() ? ExperimentConfig{} : parse_config(read_json(opts.config));
        if (opts.seed) {
            cfg.seed = opts.seed;
        }
        if (opts.solver) {
            cfg.solver = parse_solver(*opts.solver);
        }
        const fs::path out(opts.out);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec || !fs::is_directory(out)) {
            throw ConfigError("output directory '" + opts.out + "' is not writable");
        }

        if (*gen) {
            return cmd_gen_data(cfg, out);
        }
        if (*solve) {
            return cmd_solve(cfg, opts, out);
        }
        if (*residual) {
            return cmd_residual_study(cfg, out);
        }
        if (*scaling) {
            return cmd_scaling_study(cfg, out);
        }
        if (*condition) {
            return cmd_condition_study(cfg, out);
        }
        if (*loop) {
            return cmd_closed_loop(cfg, out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SizeGuardError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
