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
#include "doctest.h"

#include <Eigen/SVD>

#include "mfdeepc/deepc_core.hpp"
#include "oracles.hpp"

using namespace mfdeepc;

namespace {

struct Instance {
    LtiSystem sys;
    Trajectory traj;
    DeepcProblem problem;
};

Instance make_instance(Index n, Index m, Index horizon, std::uint64_t seed, Index extra = 0,
                       const std::optional<Setpoint>& sp = std::nullopt)
{
    LtiSystem sys = generate_system(n, m, 0.9, 1.0, seed);
    const Index length = min_data_length(n, m, horizon) + extra;
    Trajectory traj = simulate(sys, Vector::Zero(n), generate_excitation(m, length, seed + 1));
    std::mt19937_64 rng(seed + 2);
    const Vector x0 = oracle::random_vector(n, rng);
    DeepcProblem p = assemble_problem(traj, horizon, Matrix::Identity(n, n), Matrix::Identity(m, m), x0, sp);
    return {std::move(sys), std::move(traj), std::move(p)};
}

Index svd_rank(const Matrix& m, double rel_tol)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector sv = svd.singularValues();
    return (sv.array() > rel_tol * sv(0)).count();
}

/// Model-form OCP in deviation variables, condensed onto the inputs:
/// minimize sum_k |x_k - x_s|_Q^2 + |u_k - u_s|_R^2, x_{k+1} = A x_k + B u_k.
/// Returns the stacked (x_k, u_k) trajectory.
Vector deviation_ocp(const LtiSystem& sys, Index horizon, const Matrix& q, const Matrix& r, const Vector& x0,
                     const Setpoint& sp)
{
    const Index n = sys.states();
    const Index m = sys.inputs();
    const Index d = n + m;
    // Stacked deviation trajectory = phi * dx0 + gamma * du.
    Matrix phi = Matrix::Zero(d * horizon, n);
    Matrix gamma = Matrix::Zero(d * horizon, m * horizon);
    Matrix a_pow = Matrix::Identity(n, n);
    for (Index k = 0; k < horizon; ++k) {
        phi.block(k * d, 0, n, n) = a_pow;
        a_pow = sys.a * a_pow;
        gamma.block(k * d + n, k * m, m, m) = Matrix::Identity(m, m);
        for (Index j = 0; j < k; ++j) {
            Matrix gain = sys.b;
            for (Index t = j + 1; t < k; ++t) {
                gain = sys.a * gain;
            }
            gamma.block(k * d, j * m, n, m) = gain;
        }
    }
    Matrix w = Matrix::Zero(d * horizon, d * horizon);
    for (Index k = 0; k < horizon; ++k) {
        w.block(k * d, k * d, n, n) = q;
        w.block(k * d + n, k * d + n, m, m) = r;
    }
    const Vector dx0 = x0 - sp.x_s;
    const Matrix normal = gamma.transpose() * w * gamma;
    const Vector du = normal.ldlt().solve(-gamma.transpose() * w * phi * dx0);
    Vector traj = phi * dx0 + gamma * du;
    for (Index k = 0; k < horizon; ++k) {
        traj.segment(k * d, n) += sp.x_s;
        traj.segment(k * d + n, m) += sp.u_s;
    }
    return traj;
}

} // namespace

TEST_CASE("assemble_problem dimensions and data-length check")
{
    const LtiSystem sys = generate_system(2, 1, 0.9, 1.0, 3);
    CHECK(min_data_length(2, 1, 3) == 9);
    const Trajectory traj = simulate(sys, Vector::Zero(2), generate_excitation(1, 9, 4));
    const DeepcProblem p = assemble_problem(traj, 3, Matrix::Identity(2, 2), Matrix::Identity(1, 1), Vector::Ones(2));
    CHECK(p.cols() == 7);
    CHECK(p.state_dim() == 2);
    CHECK(p.input_dim() == 1);
    CHECK(p.horizon() == 3);
    CHECK(p.data_length() == 9);
    CHECK(p.linear_term().size() == 7);
    CHECK(p.linear_term().isZero());

    const Trajectory short_traj = simulate(sys, Vector::Zero(2), generate_excitation(1, 8, 4));
    CHECK_THROWS_AS(assemble_problem(short_traj, 3, Matrix::Identity(2, 2), Matrix::Identity(1, 1), Vector::Ones(2)),
                    std::invalid_argument);
    CHECK_THROWS(assemble_problem(traj, 3, -Matrix::Identity(2, 2), Matrix::Identity(1, 1), Vector::Ones(2)));
    CHECK_THROWS(assemble_problem(traj, 3, Matrix::Identity(2, 2), Matrix::Identity(1, 1), Vector::Ones(3)));
}

TEST_CASE("S from the combined operator equals the two-block form")
{
    for (auto [n, m, horizon, seed] : {std::tuple<Index, Index, Index, int>{2, 1, 3, 1}, {3, 1, 4, 2}, {5, 2, 6, 3},
                                       {4, 2, 2, 4}, {1, 1, 1, 5}}) {
        const Instance inst = make_instance(n, m, horizon, static_cast<std::uint64_t>(seed), 7);
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 100);
        const Matrix q = oracle::random_spd(n, rng);
        const Matrix r = oracle::random_spd(m, rng);
        const DeepcProblem p = assemble_problem(inst.traj, horizon, q, r, inst.problem.initial_state());
        const Matrix s_ref = oracle::s_two_block(inst.traj.states, inst.traj.inputs, horizon, q, r);

        const Matrix s_dense = dense_s_matrix(p);
        CHECK((s_dense - s_ref).norm() <= 1e-9 * s_ref.norm());

        for (int trial = 0; trial < 3; ++trial) {
            const Vector z = oracle::random_vector(p.cols(), rng);
            CHECK(oracle::rel_err(s_matvec(p, z), s_ref * z) <= 1e-9);
        }
        CHECK(s_matvec(p, Vector::Zero(p.cols())).isZero());
    }
}

TEST_CASE("identity weights collapse S to H^T H")
{
    const Instance inst = make_instance(3, 2, 4, 8, 5);
    std::mt19937_64 rng(1);
    const Vector z = oracle::random_vector(inst.problem.cols(), rng);
    const Vector expected = hankel_rmatvec(inst.problem.op(), hankel_matvec(inst.problem.op(), z));
    CHECK(oracle::rel_err(s_matvec(inst.problem, z), expected) <= 1e-12);
}

TEST_CASE("S is symmetric positive semidefinite")
{
    const Instance inst = make_instance(4, 2, 5, 12, 10);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector u = oracle::random_vector(inst.problem.cols(), rng);
        const Vector v = oracle::random_vector(inst.problem.cols(), rng);
        const double uv = u.dot(s_matvec(inst.problem, v));
        const double vu = v.dot(s_matvec(inst.problem, u));
        CHECK(std::abs(uv - vu) <= 1e-10 * (std::abs(uv) + 1.0));
        CHECK(u.dot(s_matvec(inst.problem, u)) >= 0.0);
    }
}

TEST_CASE("P and its adjoint")
{
    const Instance inst = make_instance(3, 1, 4, 21, 3);
    const DeepcProblem& p = inst.problem;
    const Matrix p_ref = oracle::p_dense(inst.traj.states, 4);

    for (Index j = 0; j < p.cols(); ++j) {
        Vector e = Vector::Zero(p.cols());
        e(j) = 1.0;
        CHECK(p_matvec(p, e) == inst.traj.states.col(j));
    }
    CHECK(p_matvec(p, Vector::Zero(p.cols())).isZero());
    CHECK(pt_matvec(p, Vector::Zero(3)).isZero());

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector z = oracle::random_vector(p.cols(), rng);
        const Vector lambda = oracle::random_vector(3, rng);
        CHECK(oracle::rel_err(p_matvec(p, z), p_ref * z) <= 1e-9);
        CHECK(oracle::rel_err(pt_matvec(p, lambda), p_ref.transpose() * lambda) <= 1e-9);
        const double lhs = p_matvec(p, z).dot(lambda);
        const double rhs = z.dot(pt_matvec(p, lambda));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + 1e-300));
    }
    CHECK((dense_p_matrix(p) - p_ref).norm() <= 1e-12 * p_ref.norm());

    CHECK_THROWS_AS(p_matvec(p, Vector::Zero(p.cols() + 1)), DimensionError);
    CHECK_THROWS_AS(pt_matvec(p, Vector::Zero(2)), DimensionError);
    CHECK_THROWS_AS(s_matvec(p, Vector::Zero(3)), DimensionError);
}

TEST_CASE("rank of S and P on persistently exciting data")
{
    for (auto [n, m, horizon, seed] : {std::tuple<Index, Index, Index, int>{3, 1, 4, 31}, {4, 2, 5, 32}, {2, 2, 6, 33}}) {
        const Instance inst = make_instance(n, m, horizon, static_cast<std::uint64_t>(seed), 15);
        REQUIRE(is_controllable(inst.sys));
        REQUIRE(is_persistently_exciting(inst.traj.inputs, horizon + n));
        CHECK(svd_rank(dense_s_matrix(inst.problem), 1e-10) == m * horizon + n);
        CHECK(svd_rank(dense_p_matrix(inst.problem), 1e-10) == n);
    }
}

TEST_CASE("tracking_linear_term")
{
    SUBCASE("zero setpoint gives zero term")
    {
        const Instance inst = make_instance(3, 1, 3, 40);
        const Vector q = tracking_linear_term(inst.problem, Setpoint{Vector::Zero(3), Vector::Zero(1)});
        CHECK(q.size() == inst.problem.cols());
        CHECK(q.isZero());
    }
    SUBCASE("scalar system with unit horizon")
    {
        const LtiSystem sys{Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1)};
        const Trajectory traj = simulate(sys, Vector::Zero(1), generate_excitation(1, 6, 2));
        const Matrix q_w = Matrix::Constant(1, 1, 2.0);
        const Matrix r_w = Matrix::Constant(1, 1, 3.0);
        const Setpoint sp = equilibrium_setpoint(sys, Vector::Constant(1, 0.7));
        const DeepcProblem p = assemble_problem(traj, 1, q_w, r_w, Vector::Zero(1), sp);
        for (Index j = 0; j < p.cols(); ++j) {
            const double expected = -(2.0 * traj.states(0, j) * sp.x_s(0) + 3.0 * traj.inputs(0, j) * sp.u_s(0));
            CHECK(p.linear_term()(j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("setpoint form reproduces the deviation-variable optimum")
{
    const Index n = 3;
    const Index m = 2;
    const Index horizon = 4;
    const LtiSystem sys = generate_system(n, m, 0.9, 1.0, 50);
    const Trajectory traj = simulate(sys, Vector::Zero(n), generate_excitation(m, min_data_length(n, m, horizon) + 6, 51));
    std::mt19937_64 rng(52);
    const Matrix q_w = oracle::random_spd(n, rng);
    const Matrix r_w = oracle::random_spd(m, rng);
    const Vector x0 = oracle::random_vector(n, rng);
    const Setpoint sp = equilibrium_setpoint(sys, oracle::random_vector(m, rng));
    const DeepcProblem p = assemble_problem(traj, horizon, q_w, r_w, x0, sp);

    const Vector sol = oracle::kkt_pinv(dense_s_matrix(p), dense_p_matrix(p), p.linear_term(), x0);
    const Vector data_traj = recover_trajectory(p, sol.head(p.cols()));
    const Vector model_traj = deviation_ocp(sys, horizon, q_w, r_w, x0, sp);
    CHECK(oracle::rel_err(data_traj, model_traj) <= 1e-7);
}

TEST_CASE("augmented Lagrangian value")
{
    const Instance inst = make_instance(3, 1, 4, 60, 4);
    const DeepcProblem& p = inst.problem;
    const Vector& x0 = p.initial_state();

    const AlState zero_state{Vector::Zero(3), 2.5};
    CHECK(al_value(p, Vector::Zero(p.cols()), zero_state) == doctest::Approx(1.25 * x0.squaredNorm()).epsilon(1e-14));

    const Matrix s = dense_s_matrix(p);
    const Matrix pm = dense_p_matrix(p);
    std::mt19937_64 rng(61);
    const Vector z = oracle::random_vector(p.cols(), rng);
    const AlState st{oracle::random_vector(3, rng), 0.7};
    const Vector c = pm * z - x0;
    const double expected =
        0.5 * z.dot(s * z) + p.linear_term().dot(z) + 0.35 * c.squaredNorm() - st.multiplier.dot(c);
    CHECK(al_value(p, z, st) == doctest::Approx(expected).epsilon(1e-10));

    // A feasible point: the value does not depend on the multiplier.
    const Vector feasible = pm.completeOrthogonalDecomposition().solve(x0);
    REQUIRE((pm * feasible - x0).norm() <= 1e-9);
    const double v1 = al_value(p, feasible, AlState{Vector::Zero(3), 3.0});
    const double v2 = al_value(p, feasible, AlState{oracle::random_vector(3, rng) * 10.0, 3.0});
    CHECK(std::abs(v1 - v2) <= 1e-8 * (1.0 + std::abs(v1)));
}

TEST_CASE("augmented Lagrangian gradient")
{
    const Instance base = make_instance(4, 2, 5, 70, 6);
    std::mt19937_64 rng(71);
    const Setpoint sp{oracle::random_vector(4, rng), oracle::random_vector(2, rng)};
    const DeepcProblem p = base.problem.with_linear_term(tracking_linear_term(base.problem, sp));
    const Vector& x0 = p.initial_state();

    const AlState zero_state{Vector::Zero(4), 1.5};
    const DeepcProblem no_q = base.problem;
    CHECK(oracle::rel_err(al_gradient(no_q, Vector::Zero(no_q.cols()), zero_state),
                          -1.5 * pt_matvec(no_q, x0)) <= 1e-12);

    const AlState st{oracle::random_vector(4, rng), 2.0};
    const Vector z = oracle::random_vector(p.cols(), rng);
    const Vector g = al_gradient(p, z, st);
    const double h = 1e-6 * (1.0 + z.norm());
    for (int trial = 0; trial < 20; ++trial) {
        const Vector v = oracle::random_vector(p.cols(), rng).normalized();
        const double fd = (al_value(p, z + h * v, st) - al_value(p, z - h * v, st)) / (2.0 * h);
        const double an = g.dot(v);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(std::abs(an), g.norm() * 1e-3));
    }

    const Matrix s = dense_s_matrix(p);
    const Matrix pm = dense_p_matrix(p);
    const Vector expected = (s + 2.0 * pm.transpose() * pm) * z + p.linear_term() -
                            pm.transpose() * (2.0 * x0 + st.multiplier);
    CHECK(oracle::rel_err(g, expected) <= 1e-9);

    // Stationary point of the dense KKT system.
    const Vector sol = oracle::kkt_pinv(s, pm, p.linear_term(), x0);
    const Vector z_star = sol.head(p.cols());
    const Vector lambda_star = sol.tail(4);
    for (double mu : {0.1, 1.0, 100.0}) {
        CHECK(al_gradient(p, z_star, AlState{lambda_star, mu}).norm() <= 1e-8 * (1.0 + g.norm()));
    }
}

TEST_CASE("augmented Lagrangian Hessian product")
{
    const Instance inst = make_instance(3, 2, 4, 80, 5);
    const DeepcProblem& p = inst.problem;
    std::mt19937_64 rng(81);
    const Vector u = oracle::random_vector(p.cols(), rng);
    const Vector v = oracle::random_vector(p.cols(), rng);

    CHECK(oracle::rel_err(al_hessian_matvec(p, v, 0.0), s_matvec(p, v)) <= 1e-14);
    const double uv = u.dot(al_hessian_matvec(p, v, 3.0));
    const double vu = v.dot(al_hessian_matvec(p, u, 3.0));
    CHECK(std::abs(uv - vu) <= 1e-10 * std::abs(uv));

    const Matrix pm = dense_p_matrix(p);
    const Matrix hess = dense_s_matrix(p) + 3.0 * pm.transpose() * pm;
    CHECK(oracle::rel_err(al_hessian_matvec(p, v, 3.0), hess * v) <= 1e-9);
    CHECK_THROWS(al_hessian_matvec(p, v, -1.0));
}

TEST_CASE("kkt_residual")
{
    const Instance inst = make_instance(3, 1, 4, 90, 4);
    const DeepcProblem& p = inst.problem;
    const Vector& x0 = p.initial_state();

    const KktResidual at_zero = kkt_residual(p, Vector::Zero(p.cols()), Vector::Zero(3));
    CHECK(at_zero.residual.size() == p.cols() + 3);
    CHECK(at_zero.residual.head(p.cols()).isZero());
    CHECK(at_zero.residual.tail(3) == -x0);
    CHECK(at_zero.norm == doctest::Approx(x0.norm()));

    const Matrix s = dense_s_matrix(p);
    const Matrix pm = dense_p_matrix(p);
    const Vector sol = oracle::kkt_pinv(s, pm, p.linear_term(), x0);
    CHECK(kkt_residual(p, sol.head(p.cols()), sol.tail(3)).norm <= 1e-8 * (1.0 + x0.norm()));

    // lambda -> residual is injective: the difference is P^T (l2 - l1).
    Eigen::JacobiSVD<Matrix> svd(pm);
    const double sigma_min = svd.singularValues()(2);
    REQUIRE(sigma_min > 0.0);
    std::mt19937_64 rng(91);
    const Vector z = oracle::random_vector(p.cols(), rng);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector l1 = oracle::random_vector(3, rng);
        const Vector l2 = oracle::random_vector(3, rng);
        const double gap = (kkt_residual(p, z, l1).residual - kkt_residual(p, z, l2).residual).norm();
        CHECK(gap >= sigma_min * (l1 - l2).norm() * (1.0 - 1e-10));
    }
}

TEST_CASE("fundamental lemma round trip")
{
    const Index n = 3;
    const Index m = 2;
    const Index horizon = 5;
    const Instance inst = make_instance(n, m, horizon, 100, 10);
    REQUIRE(is_controllable(inst.sys));
    REQUIRE(is_persistently_exciting(inst.traj.inputs, horizon + n));

    // Image of the data Hankel matrix contains every length-L trajectory.
    Matrix stacked(static_cast<Index>((n + m) * horizon), inst.problem.cols());
    stacked << oracle::hankel_by_entries(inst.traj.states, horizon), oracle::hankel_by_entries(inst.traj.inputs, horizon);
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const Trajectory t =
            simulate(inst.sys, oracle::random_vector(n, rng), oracle::random_matrix(m, horizon, rng));
        Vector target(stacked.rows());
        target << Eigen::Map<const Vector>(t.states.data(), n * horizon),
            Eigen::Map<const Vector>(t.inputs.data(), m * horizon);
        const Vector coeffs = stacked.completeOrthogonalDecomposition().solve(target);
        CHECK((stacked * coeffs - target).norm() <= 1e-8 * target.norm());
    }

    // Every combination of data columns is a trajectory of the plant.
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z = oracle::random_vector(inst.problem.cols(), rng);
        const Vector traj = recover_trajectory(inst.problem, z);
        const Index d = n + m;
        for (Index k = 0; k + 1 < horizon; ++k) {
            const Vector x = traj.segment(k * d, n);
            const Vector u = traj.segment(k * d + n, m);
            const Vector next = traj.segment((k + 1) * d, n);
            CHECK((next - inst.sys.a * x - inst.sys.b * u).norm() <= 1e-8 * (1.0 + next.norm()));
        }
    }
}

TEST_CASE("apply_stage_weights and recover_trajectory layout")
{
    const LtiSystem sys = generate_system(2, 1, 0.9, 1.0, 110);
    const Trajectory traj = simulate(sys, Vector::Zero(2), generate_excitation(1, 12, 111));
    Matrix q_w(2, 2);
    q_w << 2.0, 0.5, 0.5, 1.0;
    const Matrix r_w = Matrix::Constant(1, 1, 4.0);
    const DeepcProblem p = assemble_problem(traj, 2, q_w, r_w, Vector::Zero(2));

    Vector w(6);
    w << 1, 2, 3, 4, 5, 6;
    Vector expected(6);
    expected << q_w * w.segment(0, 2), 12.0, q_w * w.segment(3, 2), 24.0;
    CHECK(oracle::rel_err(apply_stage_weights(p, w), expected) <= 1e-15);

    Vector e0 = Vector::Zero(p.cols());
    e0(1) = 1.0;
    const Vector t = recover_trajectory(p, e0);
    CHECK(std::abs(t(0) - traj.states(0, 1)) <= 1e-13);
    CHECK(std::abs(t(2) - traj.inputs(0, 1)) <= 1e-13);
    CHECK(std::abs(t(3) - traj.states(0, 2)) <= 1e-13);
}

TEST_CASE("dense guards")
{
    const LtiSystem sys = generate_system(1, 1, 0.5, 1.0, 1);
    const Trajectory traj = simulate(sys, Vector::Zero(1), generate_excitation(1, 5000, 2));
    const DeepcProblem p = assemble_problem(traj, 2, Matrix::Identity(1, 1), Matrix::Identity(1, 1), Vector::Zero(1));
    CHECK_THROWS_AS(dense_s_matrix(p), SizeGuardError);
    CHECK_THROWS_AS(dense_p_matrix(p), SizeGuardError);
}
