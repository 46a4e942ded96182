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
#include "mfdeepc/deepc_core.hpp"

#include <Eigen/Cholesky>

namespace mfdeepc {

namespace {

void require_spd(const Matrix& w, Index dim, const char* what)
{
    if (w.rows() != dim || w.cols() != dim) {
        throw DimensionError(std::string(what) + ": wrong shape");
    }
    if (!w.isApprox(w.transpose(), 1e-12)) {
        throw std::invalid_argument(std::string(what) + ": not symmetric");
    }
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument(std::string(what) + ": not positive definite");
    }
}

} // namespace

DeepcProblem::DeepcProblem(std::shared_ptr<const SpectralHankelOperator> op, Index state_dim, Matrix q_weight,
                           Matrix r_weight, Vector initial_state, Vector linear_term)
    : op_(std::move(op)), n_(state_dim), q_weight_(std::move(q_weight)), r_weight_(std::move(r_weight)),
      x0_(std::move(initial_state)), q_(std::move(linear_term))
{
    if (!op_) {
        throw std::invalid_argument("DeepcProblem: null operator");
    }
    if (n_ < 1 || n_ >= op_->channels()) {
        throw DimensionError("DeepcProblem: state dimension must satisfy 1 <= n < d");
    }
    require_spd(q_weight_, n_, "DeepcProblem: Q");
    require_spd(r_weight_, input_dim(), "DeepcProblem: R");
    require_size(x0_.size(), n_, "DeepcProblem: x0");
    require_size(q_.size(), cols(), "DeepcProblem: linear term");
}

DeepcProblem DeepcProblem::with_initial_state(const VectorRef& x0) const
{
    return DeepcProblem(op_, n_, q_weight_, r_weight_, x0, q_);
}

DeepcProblem DeepcProblem::with_linear_term(const VectorRef& q) const
{
    return DeepcProblem(op_, n_, q_weight_, r_weight_, x0_, q);
}

Index min_data_length(Index n, Index m, Index horizon)
{
    if (n < 1 || m < 1 || horizon < 1) {
        throw std::invalid_argument("min_data_length: n, m, L must be positive");
    }
    return (m + 1) * (horizon + n) - 1;
}

DeepcProblem assemble_problem(const Trajectory& traj, Index horizon, const MatrixRef& q_weight,
                              const MatrixRef& r_weight, const VectorRef& x0, const std::optional<Setpoint>& setpoint)
{
    const Index n = traj.state_dim();
    const Index m = traj.input_dim();
    const Index required = min_data_length(n, m, horizon);
    if (traj.length() < required) {
        throw std::invalid_argument("assemble_problem: trajectory length " + std::to_string(traj.length()) +
                                    " below the minimum " + std::to_string(required));
    }
    auto op = std::make_shared<const SpectralHankelOperator>(traj.combined(), horizon);
    DeepcProblem problem(op, n, q_weight, r_weight, x0, Vector::Zero(op->cols()));
    if (setpoint) {
        return problem.with_linear_term(tracking_linear_term(problem, *setpoint));
    }
    return problem;
}

Vector apply_stage_weights(const DeepcProblem& p, const VectorRef& trajectory)
{
    const Index n = p.state_dim();
    const Index m = p.input_dim();
    const Index d = n + m;
    require_size(trajectory.size(), d * p.horizon(), "apply_stage_weights");
    Vector weighted(trajectory.size());
    Eigen::Map<const Matrix> blocks(trajectory.data(), d, p.horizon());
    Eigen::Map<Matrix> out(weighted.data(), d, p.horizon());
    out.topRows(n).noalias() = p.q_weight() * blocks.topRows(n);
    out.bottomRows(m).noalias() = p.r_weight() * blocks.bottomRows(m);
    return weighted;
}

Vector s_matvec(const DeepcProblem& p, const VectorRef& z)
{
    require_size(z.size(), p.cols(), "s_matvec: z");
    return hankel_rmatvec(p.op(), apply_stage_weights(p, hankel_matvec(p.op(), z)));
}

Vector p_matvec(const DeepcProblem& p, const VectorRef& z)
{
    require_size(z.size(), p.cols(), "p_matvec: z");
    return p.state_block() * z;
}

Vector pt_matvec(const DeepcProblem& p, const VectorRef& lambda)
{
    require_size(lambda.size(), p.state_dim(), "pt_matvec: lambda");
    return p.state_block().transpose() * lambda;
}

Vector tracking_linear_term(const DeepcProblem& p, const Setpoint& sp)
{
    require_size(sp.x_s.size(), p.state_dim(), "tracking_linear_term: x_s");
    require_size(sp.u_s.size(), p.input_dim(), "tracking_linear_term: u_s");
    const Index d = p.state_dim() + p.input_dim();
    Vector stacked(d * p.horizon());
    for (Index i = 0; i < p.horizon(); ++i) {
        stacked.segment(i * d, p.state_dim()) = sp.x_s;
        stacked.segment(i * d + p.state_dim(), p.input_dim()) = sp.u_s;
    }
    return -hankel_rmatvec(p.op(), apply_stage_weights(p, stacked));
}

double al_value(const DeepcProblem& p, const VectorRef& z, const AlState& state)
{
    require_size(state.multiplier.size(), p.state_dim(), "al_value: multiplier");
    const Vector violation = p_matvec(p, z) - p.initial_state();
    return 0.5 * z.dot(s_matvec(p, z)) + p.linear_term().dot(z) + 0.5 * state.penalty * violation.squaredNorm() -
           state.multiplier.dot(violation);
}

Vector al_gradient(const DeepcProblem& p, const VectorRef& z, const AlState& state)
{
    require_size(state.multiplier.size(), p.state_dim(), "al_gradient: multiplier");
    const Vector violation = p_matvec(p, z) - p.initial_state();
    Vector grad = s_matvec(p, z) + p.linear_term();
    grad += pt_matvec(p, state.penalty * violation - state.multiplier);
    return grad;
}

Vector al_hessian_matvec(const DeepcProblem& p, const VectorRef& v, double mu)
{
    if (mu < 0.0) {
        throw std::invalid_argument("al_hessian_matvec: penalty must be nonnegative");
    }
    Vector out = s_matvec(p, v);
    if (mu != 0.0) {
        out += mu * pt_matvec(p, p_matvec(p, v));
    }
    return out;
}

KktResidual kkt_residual(const DeepcProblem& p, const VectorRef& z, const VectorRef& lambda)
{
    require_size(lambda.size(), p.state_dim(), "kkt_residual: lambda");
    KktResidual r;
    r.residual.resize(p.cols() + p.state_dim());
    r.residual.head(p.cols()) = s_matvec(p, z) + p.linear_term() - pt_matvec(p, lambda);
    r.residual.tail(p.state_dim()) = p_matvec(p, z) - p.initial_state();
    r.norm = r.residual.norm();
    return r;
}

Vector recover_trajectory(const DeepcProblem& p, const VectorRef& z)
{
    return hankel_matvec(p.op(), z);
}

Matrix dense_s_matrix(const DeepcProblem& p)
{
    if (p.cols() > kDenseProblemGuard) {
        throw SizeGuardError("dense_s_matrix: column dimension exceeds the dense guard");
    }
    const Matrix hankel = dense_hankel(p.op().signal(), p.horizon());
    Matrix weighted(hankel.rows(), hankel.cols());
    for (Index j = 0; j < hankel.cols(); ++j) {
        weighted.col(j) = apply_stage_weights(p, hankel.col(j));
    }
    return hankel.transpose() * weighted;
}

Matrix dense_p_matrix(const DeepcProblem& p)
{
    if (p.cols() > kDenseProblemGuard) {
        throw SizeGuardError("dense_p_matrix: column dimension exceeds the dense guard");
    }
    return p.state_block();
}

} // namespace mfdeepc
