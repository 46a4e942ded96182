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
#ifndef MFDEEPC_LTI_LAB_HPP
#define MFDEEPC_LTI_LAB_HPP

#include <cstdint>

#include "mfdeepc/common.hpp"

namespace mfdeepc {

/**
 * @brief Discrete-time plant x_{k+1} = A x_k + B u_k.
 *
 * Ground truth for data generation and for verifying data-driven solutions.
 */
struct LtiSystem {
    Matrix a;
    Matrix b;

    Index states() const { return a.rows(); }
    Index inputs() const { return b.cols(); }
};

/**
 * @brief Paired state/input sequences of equal length N.
 *
 * Column k of `states` is x_k, column k of `inputs` is u_k. The combined
 * signal w_k stacks x_k over u_k.
 */
struct Trajectory {
    Matrix states;  // n x N
    Matrix inputs;  // m x N

    Index length() const { return states.cols(); }
    Index state_dim() const { return states.rows(); }
    Index input_dim() const { return inputs.rows(); }

    /// d x N matrix with column k equal to (x_k, u_k).
    Matrix combined() const;
};

struct Setpoint {
    Vector x_s;
    Vector u_s;
};

/// Random (A, B) with normal entries, Bernoulli(density) sparsity mask, and A
/// rescaled to the requested spectral radius. Resamples a bounded number of
/// times if the raw draw has zero spectral radius.
LtiSystem generate_system(Index n, Index m, double spectral_radius, double density, std::uint64_t seed);

double spectral_radius(const Matrix& a);

/// Rank of the Kalman matrix [B AB ... A^{n-1}B]. Only meaningful for small n.
Index controllability_rank(const LtiSystem& system);
bool is_controllable(const LtiSystem& system);

/// inputs is m x N; returns the trajectory with states[0] = x0.
Trajectory simulate(const LtiSystem& system, const VectorRef& x0, const MatrixRef& inputs);

/// m x length matrix of i.i.d. standard normal samples.
Matrix generate_excitation(Index m, Index length, std::uint64_t seed);

/// Numerical row rank of a dense matrix, tolerance max(rows, cols) * eps * sigma_max.
Index numerical_rank(const MatrixRef& mat);

/// True iff the depth-`order` Hankel matrix of `inputs` has numerical row rank m * order.
bool is_persistently_exciting(const MatrixRef& inputs, Index order);

/// x_s = (I - A)^{-1} B u_s. Throws std::domain_error if I - A is singular.
Setpoint equilibrium_setpoint(const LtiSystem& system, const VectorRef& u_s);

} // namespace mfdeepc

#endif // MFDEEPC_LTI_LAB_HPP
