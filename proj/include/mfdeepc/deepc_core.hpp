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
#ifndef MFDEEPC_DEEPC_CORE_HPP
#define MFDEEPC_DEEPC_CORE_HPP

#include <memory>
#include <optional>

#include "mfdeepc/common.hpp"
#include "mfdeepc/lti_lab.hpp"
#include "mfdeepc/spectral_ops.hpp"

namespace mfdeepc {

/**
 * @brief Data-driven optimal control problem
 *
 *     minimize_z  1/2 z^T S z + q^T z   subject to  P z = x0
 *
 * with S = H^T W H, W = I_L (x) blockdiag(Q, R), H the Hankel operator of the
 * combined data signal w_k = (x_k, u_k) and P z the first data state block
 * of H z. The operator is shared; copies of a problem are cheap and
 * immutable.
 */
class DeepcProblem {
public:
    DeepcProblem(std::shared_ptr<const SpectralHankelOperator> op, Index state_dim, Matrix q_weight,
                 Matrix r_weight, Vector initial_state, Vector linear_term);

    const SpectralHankelOperator& op() const { return *op_; }
    std::shared_ptr<const SpectralHankelOperator> shared_op() const { return op_; }

    Index state_dim() const { return n_; }
    Index input_dim() const { return op_->channels() - n_; }
    Index horizon() const { return op_->depth(); }
    Index data_length() const { return op_->signal_length(); }
    Index cols() const { return op_->cols(); }

    const Matrix& q_weight() const { return q_weight_; }
    const Matrix& r_weight() const { return r_weight_; }
    const Vector& initial_state() const { return x0_; }
    const Vector& linear_term() const { return q_; }

    /// n x (N-L+1) block of data states x~_0 .. x~_{N-L}; P = this block.
    auto state_block() const { return op_->signal().topLeftCorner(n_, cols()); }

    DeepcProblem with_initial_state(const VectorRef& x0) const;
    DeepcProblem with_linear_term(const VectorRef& q) const;

private:
    std::shared_ptr<const SpectralHankelOperator> op_;
    Index n_;
    Matrix q_weight_;
    Matrix r_weight_;
    Vector x0_;
    Vector q_;
};

/// Multiplier and penalty of the augmented Lagrangian.
struct AlState {
    Vector multiplier;
    double penalty = 1.0;
};

Index min_data_length(Index n, Index m, Index horizon);

/// Throws std::invalid_argument if the trajectory is shorter than min_data_length.
DeepcProblem assemble_problem(const Trajectory& traj, Index horizon, const MatrixRef& q_weight,
                              const MatrixRef& r_weight, const VectorRef& x0,
                              const std::optional<Setpoint>& setpoint = std::nullopt);

/// Applies W = I_L (x) blockdiag(Q, R) to a stacked (x_0, u_0, ..., x_{L-1}, u_{L-1}) vector.
Vector apply_stage_weights(const DeepcProblem& p, const VectorRef& trajectory);

Vector s_matvec(const DeepcProblem& p, const VectorRef& z);
Vector p_matvec(const DeepcProblem& p, const VectorRef& z);
Vector pt_matvec(const DeepcProblem& p, const VectorRef& lambda);

/// q = -H^T W (w_s repeated L times).
Vector tracking_linear_term(const DeepcProblem& p, const Setpoint& sp);

double al_value(const DeepcProblem& p, const VectorRef& z, const AlState& state);
Vector al_gradient(const DeepcProblem& p, const VectorRef& z, const AlState& state);
/// (S + mu P^T P) v.
Vector al_hessian_matvec(const DeepcProblem& p, const VectorRef& v, double mu);

struct KktResidual {
    Vector residual;  // (S z + q - P^T lambda ; P z - x0)
    double norm = 0.0;
};

KktResidual kkt_residual(const DeepcProblem& p, const VectorRef& z, const VectorRef& lambda);

/// Stacked trajectory H z in (x_0, u_0, ..., x_{L-1}, u_{L-1}) order.
Vector recover_trajectory(const DeepcProblem& p, const VectorRef& z);

constexpr Index kDenseProblemGuard = 4000;

/// Dense S and P for desk-scale verification; throw SizeGuardError above kDenseProblemGuard columns.
Matrix dense_s_matrix(const DeepcProblem& p);
Matrix dense_p_matrix(const DeepcProblem& p);

} // namespace mfdeepc

#endif // MFDEEPC_DEEPC_CORE_HPP
