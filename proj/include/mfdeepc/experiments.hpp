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
#ifndef MFDEEPC_EXPERIMENTS_HPP
#define MFDEEPC_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfdeepc/bench.hpp"
#include "mfdeepc/deepc_core.hpp"
#include "mfdeepc/lti_lab.hpp"
#include "mfdeepc/solvers.hpp"

namespace mfdeepc {

/// Invalid experiment or solver configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InstanceSpec {
    Index n = 4;
    Index m = 2;
    Index horizon = 5;
    /// Data length; plan_signal_length(n, m, horizon) when empty.
    std::optional<Index> length;
    std::uint64_t seed = 1;
    bool tracking = false;
    double spectral_radius = 0.9;
    double density = 0.5;

    void validate() const;
};

/// Plants up to this order are checked for controllability and the
/// excitation for persistency of excitation; failures are redrawn.
constexpr Index kVerifiedPlantLimit = 12;

struct Instance {
    InstanceSpec spec;
    Index length = 0;
    bool length_reconstructed = true;  ///< length chosen by plan_signal_length
    std::uint64_t plant_seed = 0;
    LtiSystem system;
    Trajectory data;
    Vector x0;
    std::optional<Setpoint> setpoint;
    Matrix q_weight;
    Matrix r_weight;

    DeepcProblem problem() const;
};

/// Seed-deterministic instance: sparse stable plant, Gaussian excitation from
/// x~_0 = 0, Gaussian x0 and (when tracking) an equilibrium setpoint from a
/// Gaussian u_s; Q = I, R = I.
Instance make_instance(const InstanceSpec& spec);

enum class SolverKind { al_lbfgs, al_gd, minres };

/// Accepts "al-lbfgs", "al-gd", "minres"; throws ConfigError otherwise.
SolverKind parse_solver(const std::string& name);
const char* solver_name(SolverKind kind);

struct SolverSettings {
    AlConfig al;
    LbfgsConfig lbfgs;
    Index gd_max_inner = 100000;
    double minres_tol = 1e-9;
    Index minres_max_iter = 100000;
};

/// Caps every method at max_iterations inner (or MINRES) iterations when given.
SolveReport run_solver(SolverKind kind, const DeepcProblem& p, const SolverSettings& settings,
                       std::optional<Index> max_iterations = std::nullopt);

struct ResidualRow {
    std::string method;
    Index iteration = 0;
    double residual_norm = 0.0;
};

struct ResidualStudy {
    std::vector<ResidualRow> rows;
    std::vector<SolveReport> reports;  ///< one per method, in request order
    /// Shared iteration budget: the al-lbfgs iteration count when al-lbfgs is
    /// requested, otherwise max_iterations.
    Index budget = 0;
};

/// al-lbfgs runs first, capped at max_iterations; the other methods then get
/// its iteration count. Throws ConfigError on an empty method list.
ResidualStudy residual_study(const Instance& inst, const std::vector<SolverKind>& methods,
                             const SolverSettings& settings, Index max_iterations);

struct ScalingConfig {
    std::vector<Index> n_values;
    std::vector<std::pair<Index, Index>> m_horizon;  ///< (m, L) pairs
    std::uint64_t seed = 1;
    Index repeats = 3;
    /// Cap on inner iterations per solve; empty runs every solve to convergence.
    std::optional<Index> max_iterations;
    SolverKind solver = SolverKind::al_lbfgs;
    SolverSettings settings;

    void validate() const;
};

struct ScalingSeries {
    Index m = 0;
    Index horizon = 0;
    std::vector<BenchRecord> records;
    /// Log-log slope of mean seconds per iteration against n; empty for a single point.
    std::optional<double> slope;
};

/// Each point: median over `repeats` solves of total and mean time.
std::vector<ScalingSeries> scaling_study(const ScalingConfig& config);

struct ConditionPoint {
    Index n = 0;
    Index m = 0;
    Index horizon = 0;
    Index length = 0;
    Index rank = 0;  ///< numerical rank of S
    Index bfgs_iterations = 0;
    double kappa_s = 0.0;
    double kappa_bs = 0.0;
};

/// Ratio of the largest to the rank-th singular value.
double condition_number(const MatrixRef& mat, Index rank);

/// Full-memory BFGS on the first inner subproblem L(., 0; mu0) from z = 0,
/// then kappa(S) and kappa(B S) over the nonzero singular values of S.
/// Throws SizeGuardError above kDenseKktGuard columns.
ConditionPoint condition_study_point(const Instance& inst, const SolverSettings& settings);

struct ClosedLoopStep {
    Index step = 0;
    Vector x;
    Vector u;
    double error = 0.0;  ///< |x - x_s|
    Index iterations = 0;
    SolveStatus status = SolveStatus::converged;
};

struct ClosedLoopResult {
    std::vector<ClosedLoopStep> steps;
    Vector x_s;
    Vector u_s;
    Vector final_state;  ///< state after the last applied input
    double final_error = 0.0;
    bool converged = true;  ///< every step's solve converged
};

/// Receding horizon: solve from the measured state, apply the first input to
/// the plant, warm start the next solve from the previous (z, lambda).
ClosedLoopResult closed_loop(const Instance& inst, Index steps, const SolverSettings& settings);

} // namespace mfdeepc

#endif // MFDEEPC_EXPERIMENTS_HPP
