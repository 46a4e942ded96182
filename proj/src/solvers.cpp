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
#include "mfdeepc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mfdeepc/minres.hpp"

namespace mfdeepc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SolveReport solve_augmented_lagrangian(const DeepcProblem& p, const AlConfig& al, const LbfgsConfig& lb,
                                       DirectionRule rule, std::string method)
{
    al.validate();
    lb.validate();
    const auto start = Clock::now();
    const Vector& x0 = p.initial_state();

    SolveReport report;
    report.method = std::move(method);
    report.config = {{"mu0", al.mu0},
                     {"mu_delta", al.mu_delta},
                     {"inner_tol", al.inner_tol},
                     {"outer_tol", al.resolved_outer_tol(x0)},
                     {"max_outer", static_cast<double>(al.max_outer)},
                     {"window", rule == DirectionRule::lbfgs ? static_cast<double>(lb.window) : 0.0},
                     {"max_inner", static_cast<double>(lb.max_inner)}};

    Vector z = al.z0 ? *al.z0 : Vector::Zero(p.cols());
    Vector lambda = al.lambda0 ? *al.lambda0 : Vector::Zero(p.state_dim());
    require_size(z.size(), p.cols(), "AlConfig: z0");
    require_size(lambda.size(), p.state_dim(), "AlConfig: lambda0");

    const double outer_tol = al.resolved_outer_tol(x0);
    Index total_inner = 0;
    LbfgsMemory<double> memory(lb.window);

    for (Index k = 0; k < al.max_outer; ++k) {
        const double mu = al.mu0 + static_cast<double>(k) * al.mu_delta;
        const AlState state{lambda, mu};
        auto gradient = [&](const Vector& v) {
            ++report.matvecs;
            return al_gradient(p, v, state);
        };
        auto hessian = [&](const Vector& v) {
            ++report.matvecs;
            return al_hessian_matvec(p, v, mu);
        };
        // Records use the first-order multiplier estimate lambda_k - mu_k (P z - x0),
        // for which the stationarity block equals the inner gradient.
        const Index base = total_inner;
        auto observer = [&](Index j, const Vector& zj, const Vector& g, double alpha) {
            if (j == 0 && k > 0) {
                return;
            }
            const Vector violation = p_matvec(p, zj) - x0;
            report.records.push_back(IterationRecord{k, base + j,
                                                     std::sqrt(g.squaredNorm() + violation.squaredNorm()),
                                                     g.norm(), alpha, seconds_since(start)});
        };

        LbfgsConfig inner = lb;
        inner.grad_tol = al.inner_tol;
        inner.max_inner = std::min(lb.max_inner, al.max_total_inner - total_inner);
        memory.clear();
        InnerResult<double> result = descent_minimize<double>(rule, gradient, hessian, z, inner, memory, observer);
        total_inner += result.iterations;
        z = std::move(result.z);

        const Vector violation = p_matvec(p, z) - x0;
        report.outer_records.push_back(OuterRecord{k, mu, lambda, violation, result.iterations, result.status});
        lambda -= mu * violation;
        report.outer_iterations = k + 1;
        // With lambda_{k+1}, the stationarity block S z + q - P^T lambda_{k+1} is the inner gradient.
        report.final_residual = std::sqrt(result.gradient.squaredNorm() + violation.squaredNorm());

        if (report.final_residual <= outer_tol) {
            report.status = SolveStatus::converged;
            break;
        }
        if (result.status == SolveStatus::degenerate_curvature) {
            report.status = SolveStatus::degenerate_curvature;
            break;
        }
        if (total_inner >= al.max_total_inner) {
            report.status = SolveStatus::max_iterations;
            break;
        }
    }

    report.z = std::move(z);
    report.lambda = std::move(lambda);
    report.inner_iterations = total_inner;
    report.elapsed_s = seconds_since(start);
    return report;
}

} // namespace

void AlConfig::validate() const
{
    if (!(mu0 > 0.0) || !(mu_delta > 0.0)) {
        throw std::invalid_argument("AlConfig: mu0 and mu_delta must be positive");
    }
    if (!(inner_tol > 0.0)) {
        throw std::invalid_argument("AlConfig: inner_tol must be positive");
    }
    if (outer_tol && !(*outer_tol > 0.0)) {
        throw std::invalid_argument("AlConfig: outer_tol must be positive");
    }
    if (max_outer < 1) {
        throw std::invalid_argument("AlConfig: max_outer must be >= 1");
    }
    if (max_total_inner < 0) {
        throw std::invalid_argument("AlConfig: max_total_inner must be nonnegative");
    }
}

double AlConfig::resolved_outer_tol(const Vector& x0) const
{
    return outer_tol ? *outer_tol : 1e-6 * (1.0 + x0.norm());
}

SolveReport solve_al_lbfgs(const DeepcProblem& p, const AlConfig& al, const LbfgsConfig& lb)
{
    return solve_augmented_lagrangian(p, al, lb, DirectionRule::lbfgs, "al-lbfgs");
}

SolveReport solve_al_gd(const DeepcProblem& p, const AlConfig& al, Index max_inner)
{
    LbfgsConfig lb;
    lb.max_inner = max_inner;
    return solve_augmented_lagrangian(p, al, lb, DirectionRule::steepest_descent, "al-gd");
}

SolveReport solve_minres_kkt(const DeepcProblem& p, double tol, Index max_iter)
{
    if (!(tol > 0.0) || max_iter < 0) {
        throw std::invalid_argument("solve_minres_kkt: tol must be positive and max_iter nonnegative");
    }
    const auto start = Clock::now();
    const Index c = p.cols();
    const Index n = p.state_dim();

    SolveReport report;
    report.method = "minres";
    report.config = {{"tol", tol}, {"max_iter", static_cast<double>(max_iter)}};

    Vector rhs(c + n);
    rhs.head(c) = -p.linear_term();
    rhs.tail(n) = p.initial_state();

    auto saddle = [&](const Vector& v) {
        ++report.matvecs;
        Vector out(c + n);
        out.head(c) = s_matvec(p, v.head(c)) + pt_matvec(p, v.tail(n));
        out.tail(n) = p_matvec(p, v.head(c));
        return out;
    };
    // |K x - b| with x = (z; -lambda) is exactly the KKT residual norm.
    auto observer = [&](Index k, const Vector&, double residual) {
        report.records.push_back(IterationRecord{0, k, residual, residual, 0.0, seconds_since(start)});
    };

    MinresResult<double> result = minres<double>(saddle, rhs, tol, max_iter, observer);
    report.z = result.x.head(c);
    report.lambda = -result.x.tail(n);
    report.status = result.status;
    report.outer_iterations = 1;
    report.inner_iterations = result.iterations;
    report.final_residual = kkt_residual(p, report.z, report.lambda).norm;
    report.elapsed_s = seconds_since(start);
    return report;
}

DenseKktSolution solve_dense_kkt(const DeepcProblem& p)
{
    const Index c = p.cols();
    const Index n = p.state_dim();
    if (c > kDenseKktGuard) {
        throw SizeGuardError("solve_dense_kkt: " + std::to_string(c) + " columns exceed the dense guard");
    }

    // Work in the coordinates a = Sigma V^T z of range(H^T): the trajectory is
    // U a, S restricted there is U^T W U, and z = V Sigma^{-1} a is minimum-norm.
    const Matrix hankel = dense_hankel(p.op().signal(), p.horizon());
    Eigen::BDCSVD<Matrix> svd(hankel, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double tol = static_cast<double>(std::max(hankel.rows(), hankel.cols())) *
                       std::numeric_limits<double>::epsilon() * (sigma.size() > 0 ? sigma(0) : 0.0);
    const Index r = (sigma.array() > tol).count();

    DenseKktSolution sol;
    sol.rank = r;
    const Matrix u = svd.matrixU().leftCols(r);
    const Matrix v = svd.matrixV().leftCols(r);
    const Vector sig = sigma.head(r);

    Matrix weighted_u(u.rows(), r);
    for (Index j = 0; j < r; ++j) {
        weighted_u.col(j) = apply_stage_weights(p, u.col(j));
    }
    const Matrix reduced_hessian = u.transpose() * weighted_u;
    const Matrix reduced_constraint = u.topRows(n);
    const Vector reduced_linear = (v.transpose() * p.linear_term()).cwiseQuotient(sig);

    Matrix kkt = Matrix::Zero(r + n, r + n);
    kkt.topLeftCorner(r, r) = reduced_hessian;
    kkt.topRightCorner(r, n) = -reduced_constraint.transpose();
    kkt.bottomLeftCorner(n, r) = reduced_constraint;
    Vector rhs(r + n);
    rhs.head(r) = -reduced_linear;
    rhs.tail(n) = p.initial_state();

    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) {
        throw std::runtime_error("solve_dense_kkt: reduced KKT matrix is singular (data not persistently exciting?)");
    }
    const Vector solution = lu.solve(rhs);
    const Vector a = solution.head(r);
    sol.lambda = solution.tail(n);
    sol.z = v * a.cwiseQuotient(sig);
    sol.trajectory = u * a;
    return sol;
}

Vector solve_model_ocp(const LtiSystem& system, Index horizon, const MatrixRef& q_weight, const MatrixRef& r_weight,
                       const VectorRef& x0, const std::optional<Setpoint>& setpoint)
{
    const Index n = system.states();
    const Index m = system.inputs();
    if (horizon < 1) {
        throw std::invalid_argument("solve_model_ocp: horizon must be positive");
    }
    require_size(x0.size(), n, "solve_model_ocp: x0");
    const Vector x_s = setpoint ? setpoint->x_s : Vector::Zero(n);
    const Vector u_s = setpoint ? setpoint->u_s : Vector::Zero(m);

    // x_k = A^k x0 + sum_{j<k} A^{k-1-j} B u_j
    Matrix free_response(n * horizon, n);
    Matrix forced(n * horizon, m * horizon);
    forced.setZero();
    Matrix power = Matrix::Identity(n, n);
    std::vector<Matrix> powers_b;
    for (Index k = 0; k < horizon; ++k) {
        free_response.middleRows(k * n, n) = power;
        powers_b.push_back(power * system.b);
        power = system.a * power;
    }
    for (Index k = 1; k < horizon; ++k) {
        for (Index j = 0; j < k; ++j) {
            forced.block(k * n, j * m, n, m) = powers_b[static_cast<std::size_t>(k - 1 - j)];
        }
    }

    Matrix q_bar = Matrix::Zero(n * horizon, n * horizon);
    Matrix r_bar = Matrix::Zero(m * horizon, m * horizon);
    Vector x_target(n * horizon);
    Vector u_target(m * horizon);
    for (Index k = 0; k < horizon; ++k) {
        q_bar.block(k * n, k * n, n, n) = q_weight;
        r_bar.block(k * m, k * m, m, m) = r_weight;
        x_target.segment(k * n, n) = x_s;
        u_target.segment(k * m, m) = u_s;
    }

    const Vector offset = x_target - free_response * x0;
    const Matrix normal = forced.transpose() * q_bar * forced + r_bar;
    const Vector rhs = forced.transpose() * q_bar * offset + r_bar * u_target;
    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("solve_model_ocp: condensed Hessian not positive definite");
    }
    const Vector u = llt.solve(rhs);
    const Vector x = free_response * x0 + forced * u;

    Vector stacked((n + m) * horizon);
    for (Index k = 0; k < horizon; ++k) {
        stacked.segment(k * (n + m), n) = x.segment(k * n, n);
        stacked.segment(k * (n + m) + n, m) = u.segment(k * m, m);
    }
    return stacked;
}

Matrix materialize_inverse_hessian(const LbfgsMemory<double>& memory, Index dim)
{
    return -two_loop_apply(memory, Matrix::Identity(dim, dim));
}

} // namespace mfdeepc
