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
#include "mfdeepc/lti_lab.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mfdeepc/spectral_ops.hpp"

namespace mfdeepc {

namespace {

constexpr int kMaxSystemDraws = 100;

Matrix sparse_normal(Index rows, Index cols, double density, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution keep(density);
    Matrix out(rows, cols);
    // Row-major fill so the draw order does not depend on Eigen's storage order.
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            const double value = normal(rng);
            out(i, j) = keep(rng) ? value : 0.0;
        }
    }
    return out;
}

} // namespace

Matrix Trajectory::combined() const
{
    if (states.cols() != inputs.cols()) {
        throw DimensionError("trajectory: states and inputs differ in length");
    }
    Matrix w(states.rows() + inputs.rows(), states.cols());
    w.topRows(states.rows()) = states;
    w.bottomRows(inputs.rows()) = inputs;
    return w;
}

double spectral_radius(const Matrix& a)
{
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("spectral_radius: eigenvalue iteration failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

LtiSystem generate_system(Index n, Index m, double radius, double density, std::uint64_t seed)
{
    if (n < 1 || m < 1) {
        throw std::invalid_argument("generate_system: n and m must be positive");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("generate_system: spectral radius must be positive");
    }
    if (!(density > 0.0 && density <= 1.0)) {
        throw std::invalid_argument("generate_system: density must lie in (0, 1]");
    }

    std::mt19937_64 rng(seed);
    for (int draw = 0; draw < kMaxSystemDraws; ++draw) {
        LtiSystem sys;
        sys.a = sparse_normal(n, n, density, rng);
        sys.b = sparse_normal(n, m, density, rng);
        const double raw = spectral_radius(sys.a);
        if (raw > 1e-8) {
            sys.a *= radius / raw;
            return sys;
        }
    }
    throw std::runtime_error("generate_system: every draw had zero spectral radius");
}

Index numerical_rank(const MatrixRef& mat)
{
    if (mat.size() == 0) {
        return 0;
    }
    Eigen::BDCSVD<Matrix> svd(mat);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    const double tol = static_cast<double>(std::max(mat.rows(), mat.cols())) *
                       std::numeric_limits<double>::epsilon() * sv(0);
    return (sv.array() > tol).count();
}

Index controllability_rank(const LtiSystem& system)
{
    const Index n = system.states();
    const Index m = system.inputs();
    Matrix kalman(n, n * m);
    Matrix block = system.b;
    for (Index k = 0; k < n; ++k) {
        kalman.middleCols(k * m, m) = block;
        block = system.a * block;
    }
    return numerical_rank(kalman);
}

bool is_controllable(const LtiSystem& system)
{
    return controllability_rank(system) == system.states();
}

Trajectory simulate(const LtiSystem& system, const VectorRef& x0, const MatrixRef& inputs)
{
    const Index n = system.states();
    require_size(x0.size(), n, "simulate: x0");
    require_size(inputs.rows(), system.inputs(), "simulate: input width");

    const Index length = inputs.cols();
    Trajectory traj;
    traj.inputs = inputs;
    traj.states.resize(n, length);
    if (length == 0) {
        return traj;
    }
    traj.states.col(0) = x0;
    for (Index k = 0; k + 1 < length; ++k) {
        traj.states.col(k + 1).noalias() = system.a * traj.states.col(k);
        traj.states.col(k + 1).noalias() += system.b * inputs.col(k);
    }
    return traj;
}

Matrix generate_excitation(Index m, Index length, std::uint64_t seed)
{
    if (m < 1 || length < 1) {
        throw std::invalid_argument("generate_excitation: m and length must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix u(m, length);
    for (Index k = 0; k < length; ++k) {
        for (Index i = 0; i < m; ++i) {
            u(i, k) = normal(rng);
        }
    }
    return u;
}

bool is_persistently_exciting(const MatrixRef& inputs, Index order)
{
    const Index length = inputs.cols();
    if (order < 1 || length < order) {
        return false;
    }
    const Index rows = inputs.rows() * order;
    if (rows > length - order + 1) {
        return false;
    }
    return numerical_rank(dense_hankel(inputs, order)) == rows;
}

Setpoint equilibrium_setpoint(const LtiSystem& system, const VectorRef& u_s)
{
    require_size(u_s.size(), system.inputs(), "equilibrium_setpoint: u_s");
    const Index n = system.states();
    const Matrix shifted = Matrix::Identity(n, n) - system.a;
    Eigen::FullPivLU<Matrix> lu(shifted);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw std::domain_error("equilibrium_setpoint: I - A is singular");
    }
    Setpoint sp;
    sp.u_s = u_s;
    sp.x_s = lu.solve(system.b * u_s);
    return sp;
}

} // namespace mfdeepc
