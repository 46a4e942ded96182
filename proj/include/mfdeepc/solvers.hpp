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
#ifndef MFDEEPC_SOLVERS_HPP
#define MFDEEPC_SOLVERS_HPP

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfdeepc/deepc_core.hpp"
#include "mfdeepc/lbfgs.hpp"
#include "mfdeepc/lti_lab.hpp"

namespace mfdeepc {

/// Outer-loop settings of the augmented Lagrangian method.
struct AlConfig {
    double mu0 = 1.0;
    double mu_delta = 10.0;
    double inner_tol = 1e-7;
    /// KKT residual target; defaults to 1e-6 * (1 + |x0|).
    std::optional<double> outer_tol;
    Index max_outer = 100;
    /// Cap on inner iterations summed over all outer iterations.
    Index max_total_inner = std::numeric_limits<Index>::max();
    std::optional<Vector> lambda0;
    std::optional<Vector> z0;

    void validate() const;
    double resolved_outer_tol(const Vector& x0) const;
};

struct IterationRecord {
    Index outer = 0;
    Index inner = 0;  ///< cumulative iteration count across the whole solve
    double residual_norm = 0.0;
    double grad_norm = 0.0;
    double alpha = 0.0;
    double elapsed_s = 0.0;
};

/// State of one augmented Lagrangian outer iteration, before its updates.
struct OuterRecord {
    Index outer = 0;
    double penalty = 0.0;
    Vector multiplier;
    Vector violation;  ///< P z_k - x0 at the inner minimizer z_k
    Index inner_iterations = 0;
    SolveStatus inner_status = SolveStatus::max_iterations;
};

struct SolveReport {
    std::string method;
    std::vector<IterationRecord> records;
    std::vector<OuterRecord> outer_records;
    Index outer_iterations = 0;
    Index inner_iterations = 0;
    Index matvecs = 0;  ///< products with S, each two Hankel transforms
    double elapsed_s = 0.0;
    double final_residual = 0.0;
    Vector z;
    Vector lambda;
    SolveStatus status = SolveStatus::max_iterations;
    std::vector<std::pair<std::string, double>> config;

    double mean_seconds_per_iteration() const
    {
        return inner_iterations > 0 ? elapsed_s / static_cast<double>(inner_iterations) : 0.0;
    }
};

/// Augmented Lagrangian outer loop with limited-memory BFGS inner solves.
SolveReport solve_al_lbfgs(const DeepcProblem& p, const AlConfig& al = {}, const LbfgsConfig& lb = {});

/// Same outer loop with steepest-descent inner solves.
SolveReport solve_al_gd(const DeepcProblem& p, const AlConfig& al = {}, Index max_inner = 100000);

/// MINRES on the saddle system [[S, P^T], [P, 0]] (z; nu) = (-q; x0).
/// The reported multiplier is lambda = -nu.
SolveReport solve_minres_kkt(const DeepcProblem& p, double tol, Index max_iter);

struct DenseKktSolution {
    Vector z;           ///< minimum-norm primal solution
    Vector lambda;
    Vector trajectory;  ///< H z
    Index rank = 0;     ///< numerical rank of H
};

constexpr Index kDenseKktGuard = 2000;

/// Dense verification oracle; refuses instances with more than kDenseKktGuard columns.
DenseKktSolution solve_dense_kkt(const DeepcProblem& p);

/// Model-based OCP on (x, u) with the true dynamics, condensed onto the
/// inputs. Returns the stacked trajectory (x_0, u_0, ..., x_{L-1}, u_{L-1}).
Vector solve_model_ocp(const LtiSystem& system, Index horizon, const MatrixRef& q_weight, const MatrixRef& r_weight,
                       const VectorRef& x0, const std::optional<Setpoint>& setpoint = std::nullopt);

/// Inverse-Hessian approximation of a finished BFGS run as a dense matrix,
/// obtained by applying the two-loop recursion to the identity.
Matrix materialize_inverse_hessian(const LbfgsMemory<double>& memory, Index dim);

} // namespace mfdeepc

#endif // MFDEEPC_SOLVERS_HPP
