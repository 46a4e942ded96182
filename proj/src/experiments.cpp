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
#include "mfdeepc/experiments.hpp"

#include <algorithm>
#include <random>

#include <Eigen/SVD>

namespace mfdeepc {

namespace {

// Excitation Hankel matrices above this many rows are not rank-checked.
constexpr Index kVerifiedHankelRows = 600;
constexpr std::uint64_t kMaxRedraws = 50;

Vector normal_vector(Index size, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
        v(i) = normal(rng);
    }
    return v;
}

} // namespace

void InstanceSpec::validate() const
{
    if (n < 1 || m < 1 || horizon < 1) {
        throw ConfigError("instance: n, m and L must be >= 1");
    }
    if (length && *length < min_data_length(n, m, horizon)) {
        throw ConfigError("instance: N = " + std::to_string(*length) + " is below the minimum " +
                          std::to_string(min_data_length(n, m, horizon)));
    }
    if (!(spectral_radius > 0.0) || !(density > 0.0) || density > 1.0) {
        throw ConfigError("instance: spectral_radius must be positive and density in (0, 1]");
    }
}

DeepcProblem Instance::problem() const
{
    return assemble_problem(data, spec.horizon, q_weight, r_weight, x0, setpoint);
}

Instance make_instance(const InstanceSpec& spec)
{
    spec.validate();
    Instance inst;
    inst.spec = spec;
    inst.length_reconstructed = !spec.length.has_value();
    inst.length = spec.length.value_or(plan_signal_length(spec.n, spec.m, spec.horizon));

    const bool verify = spec.n <= kVerifiedPlantLimit && spec.m * (spec.horizon + spec.n) <= kVerifiedHankelRows;
    Matrix inputs;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == kMaxRedraws) {
            throw std::runtime_error("make_instance: no controllable, persistently exciting draw");
        }
        inst.plant_seed = derive_seed(spec.seed, 100 + attempt);
        inst.system = generate_system(spec.n, spec.m, spec.spectral_radius, spec.density, inst.plant_seed);
        inputs = generate_excitation(spec.m, inst.length, derive_seed(inst.plant_seed, 1));
        if (!verify ||
            (is_controllable(inst.system) && is_persistently_exciting(inputs, spec.horizon + spec.n))) {
            break;
        }
    }
    inst.data = simulate(inst.system, Vector::Zero(spec.n), inputs);

    std::mt19937_64 rng(derive_seed(spec.seed, 2));
    inst.x0 = normal_vector(spec.n, rng);
    if (spec.tracking) {
        inst.setpoint = equilibrium_setpoint(inst.system, normal_vector(spec.m, rng));
    }
    inst.q_weight = Matrix::Identity(spec.n, spec.n);
    inst.r_weight = Matrix::Identity(spec.m, spec.m);
    return inst;
}

SolverKind parse_solver(const std::string& name)
{
    if (name == "al-lbfgs") {
        return SolverKind::al_lbfgs;
    }
    if (name == "al-gd") {
        return SolverKind::al_gd;
    }
    if (name == "minres") {
        return SolverKind::minres;
    }
    throw ConfigError("unknown solver '" + name + "' (expected al-lbfgs, al-gd or minres)");
}

const char* solver_name(SolverKind kind)
{
    switch (kind) {
    case SolverKind::al_lbfgs:
        return "al-lbfgs";
    case SolverKind::al_gd:
        return "al-gd";
    case SolverKind::minres:
        return "minres";
    }
    return "unknown";
}

SolveReport run_solver(SolverKind kind, const DeepcProblem& p, const SolverSettings& settings,
                       std::optional<Index> max_iterations)
{
    AlConfig al = settings.al;
    if (max_iterations) {
        al.max_total_inner = std::min(al.max_total_inner, *max_iterations);
    }
    switch (kind) {
    case SolverKind::al_lbfgs:
        return solve_al_lbfgs(p, al, settings.lbfgs);
    case SolverKind::al_gd:
        return solve_al_gd(p, al, settings.gd_max_inner);
    case SolverKind::minres:
        return solve_minres_kkt(p, settings.minres_tol,
                                max_iterations ? std::min(settings.minres_max_iter, *max_iterations)
                                               : settings.minres_max_iter);
    }
    throw ConfigError("run_solver: unknown solver");
}

ResidualStudy residual_study(const Instance& inst, const std::vector<SolverKind>& methods,
                             const SolverSettings& settings, Index max_iterations)
{
    if (methods.empty()) {
        throw ConfigError("residual study: empty method list");
    }
    if (max_iterations < 1) {
        throw ConfigError("residual study: max_iterations must be >= 1");
    }
    const DeepcProblem p = inst.problem();
    ResidualStudy study;
    study.budget = max_iterations;
    study.reports.resize(methods.size());

    const auto first = std::find(methods.begin(), methods.end(), SolverKind::al_lbfgs);
    if (first != methods.end()) {
        SolveReport lead = run_solver(SolverKind::al_lbfgs, p, settings, max_iterations);
        study.budget = std::max<Index>(lead.inner_iterations, 1);
        for (std::size_t i = 0; i < methods.size(); ++i) {
            if (methods[i] == SolverKind::al_lbfgs) {
                study.reports[i] = lead;
            }
        }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (methods[i] != SolverKind::al_lbfgs) {
            study.reports[i] = run_solver(methods[i], p, settings, study.budget);
        }
        for (const IterationRecord& rec : study.reports[i].records) {
            study.rows.push_back(ResidualRow{solver_name(methods[i]), rec.inner, rec.residual_norm});
        }
    }
    return study;
}

void ScalingConfig::validate() const
{
    if (n_values.empty() || m_horizon.empty()) {
        throw ConfigError("scaling study: n sweep and (m, L) list must be non-empty");
    }
    if (repeats < 1) {
        throw ConfigError("scaling study: repeats must be >= 1");
    }
    if (max_iterations && *max_iterations < 1) {
        throw ConfigError("scaling study: max_iterations must be >= 1");
    }
}

std::vector<ScalingSeries> scaling_study(const ScalingConfig& config)
{
    config.validate();
    std::vector<ScalingSeries> out;
    for (const auto& [m, horizon] : config.m_horizon) {
        ScalingSeries series;
        series.m = m;
        series.horizon = horizon;
        std::vector<double> xs;
        std::vector<double> ys;
        for (const Index n : config.n_values) {
            InstanceSpec spec;
            spec.n = n;
            spec.m = m;
            spec.horizon = horizon;
            spec.seed = config.seed;
            const Instance inst = make_instance(spec);
            const DeepcProblem p = inst.problem();

            Index iterations = 0;
            std::vector<double> seconds;
            for (Index r = 0; r < config.repeats; ++r) {
                const SolveReport rep = run_solver(config.solver, p, config.settings, config.max_iterations);
                iterations = rep.inner_iterations;
                seconds.push_back(rep.elapsed_s);
            }
            BenchRecord rec = make_bench_record(n, m, horizon, inst.length, iterations, median(seconds));
            xs.push_back(static_cast<double>(n));
            ys.push_back(rec.mean_seconds);
            series.records.push_back(rec);
        }
        series.slope = loglog_slope(xs, ys);
        out.push_back(std::move(series));
    }
    return out;
}

double condition_number(const MatrixRef& mat, Index rank)
{
    if (rank < 1) {
        throw std::invalid_argument("condition_number: rank must be >= 1");
    }
    const Eigen::BDCSVD<Matrix> svd(mat);
    const Vector& sv = svd.singularValues();
    if (rank > sv.size()) {
        throw std::invalid_argument("condition_number: rank exceeds the matrix size");
    }
    return sv(0) / sv(rank - 1);
}

ConditionPoint condition_study_point(const Instance& inst, const SolverSettings& settings)
{
    const DeepcProblem p = inst.problem();
    if (p.cols() > kDenseKktGuard) {
        throw SizeGuardError("condition study: " + std::to_string(p.cols()) + " columns exceed the dense limit " +
                             std::to_string(kDenseKktGuard));
    }
    const Matrix s = dense_s_matrix(p);
    const Matrix pm = dense_p_matrix(p);
    const double mu = settings.al.mu0;
    const Matrix hess = s + mu * pm.transpose() * pm;
    const Vector rhs = p.linear_term() - mu * pm.transpose() * p.initial_state();

    LbfgsConfig cfg = settings.lbfgs;
    cfg.window = p.cols();
    cfg.grad_tol = settings.al.inner_tol;
    LbfgsMemory<double> memory(cfg.window);
    const InnerResult<double> run = descent_minimize<double>(
        DirectionRule::lbfgs, [&](const Vector& z) -> Vector { return hess * z + rhs; },
        [&](const Vector& v) -> Vector { return hess * v; }, Vector::Zero(p.cols()), cfg, memory,
        [](Index, const Vector&, const Vector&, double) {});

    const Matrix b = materialize_inverse_hessian(memory, p.cols());
    ConditionPoint pt;
    pt.n = p.state_dim();
    pt.m = p.input_dim();
    pt.horizon = p.horizon();
    pt.length = p.data_length();
    pt.rank = numerical_rank(s);
    pt.bfgs_iterations = run.iterations;
    pt.kappa_s = condition_number(s, pt.rank);
    pt.kappa_bs = condition_number(b * s, pt.rank);
    return pt;
}

ClosedLoopResult closed_loop(const Instance& inst, Index steps, const SolverSettings& settings)
{
    if (steps < 0) {
        throw ConfigError("closed loop: steps must be nonnegative");
    }
    const Index n = inst.spec.n;
    const Index m = inst.spec.m;
    const DeepcProblem base = inst.problem();
    ClosedLoopResult out;
    out.x_s = inst.setpoint ? inst.setpoint->x_s : Vector::Zero(n);
    out.u_s = inst.setpoint ? inst.setpoint->u_s : Vector::Zero(m);

    Vector x = inst.x0;
    SolverSettings warm = settings;
    for (Index k = 0; k < steps; ++k) {
        const DeepcProblem p = base.with_initial_state(x);
        const SolveReport rep = solve_al_lbfgs(p, warm.al, warm.lbfgs);
        const Vector u = recover_trajectory(p, rep.z).segment(n, m);
        out.steps.push_back(ClosedLoopStep{k, x, u, (x - out.x_s).norm(), rep.inner_iterations, rep.status});
        out.converged = out.converged && rep.status == SolveStatus::converged;
        warm.al.z0 = rep.z;
        warm.al.lambda0 = rep.lambda;
        x = inst.system.a * x + inst.system.b * u;
    }
    out.final_state = x;
    out.final_error = (x - out.x_s).norm();
    return out;
}

} // namespace mfdeepc
