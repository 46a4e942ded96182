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

#include <Eigen/LU>

#include "mfdeepc/lti_lab.hpp"
#include "oracles.hpp"

using namespace mfdeepc;

namespace {

double zero_fraction(const Matrix& m)
{
    return static_cast<double>((m.array() == 0.0).count()) / static_cast<double>(m.size());
}

} // namespace

TEST_CASE("generate_system rescales to the requested spectral radius")
{
    const LtiSystem sys = generate_system(2, 1, 0.9, 1.0, 7);
    CHECK(sys.a.rows() == 2);
    CHECK(sys.b.cols() == 1);
    CHECK(spectral_radius(sys.a) == doctest::Approx(0.9).epsilon(1e-9));

    const LtiSystem big = generate_system(40, 7, 0.9, 0.5, 11);
    CHECK(std::abs(spectral_radius(big.a) - 0.9) < 1e-9);
}

TEST_CASE("generate_system sparsity at density 0.5")
{
    const LtiSystem sys = generate_system(100, 50, 0.9, 0.5, 1);
    CHECK(zero_fraction(sys.a) >= 0.4);
    CHECK(zero_fraction(sys.a) <= 0.6);
    CHECK(zero_fraction(sys.b) >= 0.4);
    CHECK(zero_fraction(sys.b) <= 0.6);

    const LtiSystem dense = generate_system(10, 3, 0.9, 1.0, 1);
    CHECK(zero_fraction(dense.a) == 0.0);
}

TEST_CASE("generate_system is reproducible and validates arguments")
{
    const LtiSystem a = generate_system(6, 2, 0.9, 0.5, 42);
    const LtiSystem b = generate_system(6, 2, 0.9, 0.5, 42);
    const LtiSystem c = generate_system(6, 2, 0.9, 0.5, 43);
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
    CHECK(a.a != c.a);

    CHECK_THROWS_AS(generate_system(3, 1, 0.0, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_system(3, 1, -1.0, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_system(0, 1, 0.9, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_system(3, 1, 0.9, 0.0, 1), std::invalid_argument);
}

TEST_CASE("controllability of a generic random system")
{
    const LtiSystem sys = generate_system(3, 1, 0.9, 1.0, 5);
    // Independent rank via full-pivot LU on the Kalman matrix.
    Matrix kalman(3, 3);
    kalman << sys.b, sys.a * sys.b, sys.a * sys.a * sys.b;
    Eigen::FullPivLU<Matrix> lu(kalman);
    CHECK(lu.rank() == 3);
    CHECK(controllability_rank(sys) == 3);
    CHECK(is_controllable(sys));

    LtiSystem decoupled{Matrix::Identity(2, 2) * 0.5, Matrix(2, 1)};
    decoupled.b << 1.0, 0.0;
    CHECK_FALSE(is_controllable(decoupled));
}

TEST_CASE("simulate: closed-form cases")
{
    SUBCASE("A = 0, B = I shifts inputs")
    {
        LtiSystem sys{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
        Matrix u(2, 4);
        u << 1, 2, 3, 4, 5, 6, 7, 8;
        const Trajectory t = simulate(sys, Vector::Zero(2), u);
        CHECK(t.states.col(0).isZero());
        CHECK(t.states.col(1) == u.col(0));
        CHECK(t.states.col(2) == u.col(1));
        CHECK(t.states.col(3) == u.col(2));
    }
    SUBCASE("scalar accumulation")
    {
        LtiSystem sys{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
        const Trajectory t = simulate(sys, Vector::Ones(1), Matrix::Ones(1, 3));
        CHECK(t.states(0, 0) == 1.0);
        CHECK(t.states(0, 1) == 2.0);
        CHECK(t.states(0, 2) == 3.0);
    }
}

TEST_CASE("simulate matches a step-by-step recursion")
{
    std::mt19937_64 rng(3);
    LtiSystem sys{oracle::random_matrix(4, 4, rng), oracle::random_matrix(4, 2, rng)};
    const Vector x0 = oracle::random_vector(4, rng);
    const Matrix u = oracle::random_matrix(2, 20, rng);
    const Trajectory t = simulate(sys, x0, u);

    Vector x = x0;
    for (Index k = 0; k < 20; ++k) {
        CHECK((t.states.col(k) - x).norm() <= 1e-14 * (1.0 + x.norm()));
        Vector next = Vector::Zero(4);
        for (Index i = 0; i < 4; ++i) {
            for (Index j = 0; j < 4; ++j) {
                next(i) += sys.a(i, j) * x(j);
            }
            for (Index j = 0; j < 2; ++j) {
                next(i) += sys.b(i, j) * u(j, k);
            }
        }
        x = next;
    }
    CHECK(t.combined().rows() == 6);
    CHECK(t.combined().col(5).head(4) == t.states.col(5));
    CHECK(t.combined().col(5).tail(2) == t.inputs.col(5));
}

TEST_CASE("simulate dynamics residual on generated data")
{
    const LtiSystem sys = generate_system(8, 3, 0.9, 0.5, 9);
    const Trajectory t = simulate(sys, Vector::Zero(8), generate_excitation(3, 200, 10));
    for (Index k = 0; k + 1 < t.length(); ++k) {
        const Vector pred = sys.a * t.states.col(k) + sys.b * t.inputs.col(k);
        CHECK((t.states.col(k + 1) - pred).lpNorm<Eigen::Infinity>() <=
              1e-12 * (1.0 + t.states.col(k + 1).lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("simulate rejects mismatched dimensions")
{
    LtiSystem sys{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
    CHECK_THROWS_AS(simulate(sys, Vector::Zero(3), Matrix::Zero(2, 4)), DimensionError);
    CHECK_THROWS_AS(simulate(sys, Vector::Zero(2), Matrix::Zero(1, 4)), DimensionError);
}

TEST_CASE("generate_excitation")
{
    CHECK(generate_excitation(1, 3, 0) == generate_excitation(1, 3, 0));

    const Matrix u = generate_excitation(2, 1000, 3);
    const Vector mean = u.rowwise().mean();
    CHECK(std::abs(mean(0)) < 0.15);
    CHECK(std::abs(mean(1)) < 0.15);

    // (m+1)(L+n)-1 samples with n=3, L=4, m=1 suffice for order L+n = 7.
    const Matrix pe = generate_excitation(1, 13, 4);
    CHECK(is_persistently_exciting(pe, 7));

    CHECK_THROWS(generate_excitation(1, 0, 0));
}

TEST_CASE("is_persistently_exciting")
{
    CHECK_FALSE(is_persistently_exciting(Matrix::Constant(1, 10, 2.5), 2));
    CHECK_FALSE(is_persistently_exciting(Matrix::Zero(1, 10), 1));
    CHECK_FALSE(is_persistently_exciting(Matrix::Zero(2, 10), 3));
    CHECK(is_persistently_exciting(generate_excitation(1, 20, 8), 5));
    CHECK_FALSE(is_persistently_exciting(generate_excitation(1, 4, 8), 5));
    // Too short for a full-row-rank Hankel matrix: 2*5 rows, 6 columns.
    CHECK_FALSE(is_persistently_exciting(generate_excitation(2, 10, 8), 5));
}

TEST_CASE("equilibrium_setpoint")
{
    const LtiSystem sys = generate_system(5, 2, 0.9, 0.5, 2);
    const Setpoint zero = equilibrium_setpoint(sys, Vector::Zero(2));
    CHECK(zero.x_s.isZero());

    LtiSystem scalar{Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1)};
    CHECK(equilibrium_setpoint(scalar, Vector::Ones(1)).x_s(0) == doctest::Approx(2.0));

    std::mt19937_64 rng(4);
    const Vector u_s = oracle::random_vector(2, rng);
    const Setpoint sp = equilibrium_setpoint(sys, u_s);
    CHECK((sp.x_s - sys.a * sp.x_s - sys.b * u_s).norm() <= 1e-10);

    LtiSystem marginal{Matrix::Identity(2, 2), Matrix::Ones(2, 1)};
    CHECK_THROWS_AS(equilibrium_setpoint(marginal, Vector::Ones(1)), std::domain_error);
}
