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

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "mfdeepc/experiments.hpp"
#include "mfdeepc/spectral_ops.hpp"
#include "oracles.hpp"

using namespace mfdeepc;

namespace {

InstanceSpec small_spec(Index n, Index m, Index horizon, std::uint64_t seed, bool tracking = false)
{
    InstanceSpec spec;
    spec.n = n;
    spec.m = m;
    spec.horizon = horizon;
    spec.seed = seed;
    spec.tracking = tracking;
    return spec;
}

double oracle_kappa(const Eigen::MatrixXd& mat, Index rank)
{
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
    return svd.singularValues()(0) / svd.singularValues()(rank - 1);
}

} // namespace

TEST_CASE("make_instance is seed-deterministic")
{
    const Instance a = make_instance(small_spec(4, 2, 5, 11, true));
    const Instance b = make_instance(small_spec(4, 2, 5, 11, true));
    const Instance c = make_instance(small_spec(4, 2, 5, 12, true));
    CHECK(a.system.a == b.system.a);
    CHECK(a.system.b == b.system.b);
    CHECK(a.data.states == b.data.states);
    CHECK(a.data.inputs == b.data.inputs);
    CHECK(a.x0 == b.x0);
    CHECK(a.setpoint->u_s == b.setpoint->u_s);
    CHECK(a.data.inputs != c.data.inputs);
    CHECK(a.x0 != c.x0);
}

TEST_CASE("make_instance: planned length, weights, setpoint")
{
    const Instance inst = make_instance(small_spec(5, 2, 4, 3, true));
    CHECK(inst.length == plan_signal_length(5, 2, 4));
    CHECK(inst.length_reconstructed);
    CHECK(oracle::largest_prime_factor(inst.length) <= 7);
    CHECK(inst.data.length() == inst.length);
    CHECK(inst.data.states.col(0).isZero());
    CHECK(inst.q_weight.isIdentity());
    CHECK(inst.r_weight.isIdentity());
    const Setpoint& sp = *inst.setpoint;
    CHECK((inst.system.a * sp.x_s + inst.system.b * sp.u_s - sp.x_s).norm() <= 1e-10 * (1.0 + sp.x_s.norm()));

    InstanceSpec fixed = small_spec(5, 2, 4, 3);
    fixed.length = 60;
    const Instance g = make_instance(fixed);
    CHECK(g.length == 60);
    CHECK_FALSE(g.length_reconstructed);
    CHECK_FALSE(g.setpoint.has_value());
}

TEST_CASE("make_instance: small instances are controllable and persistently exciting")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 4);
        const Index m = 1 + static_cast<Index>(seed % 2);
        const Index horizon = 3 + static_cast<Index>(seed % 3);
        const Instance inst = make_instance(small_spec(n, m, horizon, seed));
        CHECK(is_controllable(inst.system));
        CHECK(is_persistently_exciting(inst.data.inputs, horizon + n));
        // Rank oracle on the combined data Hankel matrix.
        const Eigen::MatrixXd h = oracle::hankel_by_entries(inst.data.combined(), horizon);
        CHECK(numerical_rank(h) == m * horizon + n);
    }
}

TEST_CASE("InstanceSpec validation")
{
    CHECK_THROWS_AS(make_instance(small_spec(0, 1, 1, 1)), ConfigError);
    CHECK_THROWS_AS(make_instance(small_spec(1, 0, 1, 1)), ConfigError);
    InstanceSpec s = small_spec(2, 1, 3, 1);
    s.length = min_data_length(2, 1, 3) - 1;
    CHECK_THROWS_AS(make_instance(s), ConfigError);
    s = small_spec(2, 1, 3, 1);
    s.density = 0.0;
    CHECK_THROWS_AS(make_instance(s), ConfigError);
}

TEST_CASE("solver names")
{
    for (SolverKind k : {SolverKind::al_lbfgs, SolverKind::al_gd, SolverKind::minres}) {
        CHECK(parse_solver(solver_name(k)) == k);
    }
    CHECK_THROWS_AS(parse_solver("newton"), ConfigError);
    CHECK_THROWS_AS(parse_solver(""), ConfigError);
}

TEST_CASE("run_solver respects the iteration cap")
{
    const Instance inst = make_instance(small_spec(6, 2, 5, 4, true));
    const DeepcProblem p = inst.problem();
    SolverSettings st;
    for (SolverKind k : {SolverKind::al_lbfgs, SolverKind::al_gd, SolverKind::minres}) {
        const SolveReport r = run_solver(k, p, st, 7);
        CHECK(r.method == solver_name(k));
        CHECK(r.inner_iterations <= 7);
    }
    const SolveReport full = run_solver(SolverKind::al_lbfgs, p, st);
    CHECK(full.status == SolveStatus::converged);
}

TEST_CASE("residual study")
{
    SolverSettings st;
    CHECK_THROWS_AS(residual_study(make_instance(small_spec(3, 1, 4, 1)), {}, st, 100), ConfigError);

    const std::vector<SolverKind> methods = {SolverKind::al_gd, SolverKind::al_lbfgs, SolverKind::minres};
    std::vector<std::vector<ResidualRow>> runs;
    for (std::uint64_t seed : {5, 6}) {
        const ResidualStudy study = residual_study(make_instance(small_spec(8, 2, 6, seed, true)), methods, st, 5000);
        REQUIRE(study.reports.size() == 3);
        const SolveReport& lbfgs = study.reports[1];
        CHECK(lbfgs.method == "al-lbfgs");
        CHECK(lbfgs.status == SolveStatus::converged);
        CHECK(study.budget == lbfgs.inner_iterations);
        CHECK(study.reports[0].inner_iterations <= study.budget);
        CHECK(study.reports[2].inner_iterations <= study.budget);
        CHECK(study.reports[0].final_residual > lbfgs.final_residual);
        for (const ResidualRow& row : study.rows) {
            CHECK(row.iteration >= 0);
            CHECK(row.iteration <= study.budget);
            CHECK(row.residual_norm >= 0.0);
        }
        CHECK(std::count_if(study.rows.begin(), study.rows.end(),
                            [](const ResidualRow& r) { return r.method == "minres"; }) > 0);
        runs.push_back(study.rows);
    }
    CHECK(runs[0].size() != runs[1].size());

    const ResidualStudy no_lead = residual_study(make_instance(small_spec(3, 1, 4, 1)), {SolverKind::al_gd}, st, 12);
    CHECK(no_lead.budget == 12);
    CHECK(no_lead.reports[0].inner_iterations <= 12);
}

TEST_CASE("scaling study")
{
    ScalingConfig cfg;
    cfg.n_values = {4};
    cfg.m_horizon = {{2, 3}};
    cfg.repeats = 2;
    const std::vector<ScalingSeries> one = scaling_study(cfg);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0].records.size() == 1);
    CHECK_FALSE(one[0].slope.has_value());
    const BenchRecord& rec = one[0].records[0];
    CHECK(rec.total_iterations > 0);
    CHECK(rec.mean_seconds == doctest::Approx(rec.total_seconds / static_cast<double>(rec.total_iterations)));
    CHECK(rec.length == plan_signal_length(4, 2, 3));
    CHECK(rec.dense_bytes == memory_estimate(4, 2, 3, rec.length).dense_s_bytes);

    cfg.n_values = {4, 8};
    cfg.m_horizon = {{2, 3}, {1, 2}};
    cfg.max_iterations = 20;
    const std::vector<ScalingSeries> two = scaling_study(cfg);
    REQUIRE(two.size() == 2);
    CHECK(two[1].m == 1);
    CHECK(two[1].horizon == 2);
    for (const ScalingSeries& s : two) {
        CHECK(s.records.size() == 2);
        CHECK(s.slope.has_value());
        for (const BenchRecord& r : s.records) {
            CHECK(r.total_iterations <= 20);
        }
    }

    ScalingConfig bad = cfg;
    bad.n_values.clear();
    CHECK_THROWS_AS(scaling_study(bad), ConfigError);
    bad = cfg;
    bad.repeats = 0;
    CHECK_THROWS_AS(scaling_study(bad), ConfigError);
}

TEST_CASE("condition_number")
{
    CHECK(condition_number(Matrix::Identity(6, 6), 6) == doctest::Approx(1.0));
    Matrix d = Matrix::Zero(4, 4);
    d.diagonal() << 8.0, 4.0, 2.0, 0.0;
    CHECK(condition_number(d, 3) == doctest::Approx(4.0));
    CHECK_THROWS_AS(condition_number(d, 0), std::invalid_argument);
    CHECK_THROWS_AS(condition_number(d, 5), std::invalid_argument);
}

TEST_CASE("condition study point against a dense BFGS recursion")
{
    const Instance inst = make_instance(small_spec(3, 1, 4, 2));
    SolverSettings st;
    const ConditionPoint pt = condition_study_point(inst, st);

    const Index horizon = inst.spec.horizon;
    const Eigen::MatrixXd s = oracle::s_two_block(inst.data.states, inst.data.inputs, horizon, inst.q_weight,
                                                  inst.r_weight);
    const Eigen::MatrixXd pm = oracle::p_dense(inst.data.states, horizon);
    const Index dim = s.rows();
    CHECK(pt.rank == inst.spec.m * horizon + inst.spec.n);
    CHECK(pt.length == inst.length);
    CHECK(pt.kappa_s == doctest::Approx(oracle_kappa(s, pt.rank)).epsilon(1e-8));

    const double mu = st.al.mu0;
    const Eigen::MatrixXd hess = s + mu * pm.transpose() * pm;
    const Eigen::VectorXd rhs = -mu * pm.transpose() * inst.x0;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd g = rhs;
    std::vector<Eigen::VectorXd> ss;
    std::vector<Eigen::VectorXd> ys;
    auto current = [&] {
        if (ss.empty()) {
            return Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim));
        }
        const double gamma = ss.back().dot(ys.back()) / ys.back().squaredNorm();
        return oracle::bfgs_dense(gamma * Eigen::MatrixXd::Identity(dim, dim), ss, ys);
    };
    Index iterations = 0;
    while (g.norm() > st.al.inner_tol && iterations < 1000) {
        const Eigen::VectorXd p = -current() * g;
        const Eigen::VectorXd hp = hess * p;
        const double alpha = -g.dot(p) / p.dot(hp);
        z += alpha * p;
        g = hess * z + rhs;
        ss.push_back(alpha * p);
        ys.push_back(alpha * hp);
        ++iterations;
    }
    CHECK(pt.bfgs_iterations == iterations);
    const double want = oracle_kappa(current() * s, pt.rank);
    CHECK(pt.kappa_bs == doctest::Approx(want).epsilon(1e-4));
    CHECK(pt.kappa_bs < pt.kappa_s);
}

TEST_CASE("condition study refuses instances beyond the dense guard")
{
    const Instance big = make_instance(small_spec(100, 20, 10, 1));
    CHECK(big.problem().cols() > kDenseKktGuard);
    CHECK_THROWS_AS(condition_study_point(big, SolverSettings{}), SizeGuardError);
}

TEST_CASE("closed loop: zero state without setpoint stays at zero")
{
    Instance inst = make_instance(small_spec(4, 2, 5, 7));
    inst.x0.setZero();
    const ClosedLoopResult r = closed_loop(inst, 10, SolverSettings{});
    REQUIRE(r.steps.size() == 10);
    for (const ClosedLoopStep& s : r.steps) {
        CHECK(s.x.isZero());
        CHECK(s.u.isZero());
        CHECK(s.error == 0.0);
    }
    CHECK(r.final_error == 0.0);
    CHECK(r.converged);
}

TEST_CASE("closed loop: tracking converges to the setpoint")
{
    const Instance inst = make_instance(small_spec(4, 2, 6, 1, true));
    const ClosedLoopResult r = closed_loop(inst, 50, SolverSettings{});
    CHECK(r.converged);
    CHECK(r.x_s == inst.setpoint->x_s);
    Index reached = -1;
    for (const ClosedLoopStep& s : r.steps) {
        if (s.error <= 1e-3) {
            reached = s.step;
            break;
        }
    }
    CHECK(reached >= 0);
    CHECK(r.final_error <= 1e-3);
    CHECK(r.steps.back().error < r.steps.front().error);

    // First applied input against the dense oracle and the model-based OCP.
    const DeepcProblem p = inst.problem();
    const DenseKktSolution dense = solve_dense_kkt(p);
    const Vector model = solve_model_ocp(inst.system, inst.spec.horizon, inst.q_weight, inst.r_weight, inst.x0,
                                         inst.setpoint);
    const Vector u0 = r.steps.front().u;
    CHECK(oracle::rel_err(u0, dense.trajectory.segment(inst.spec.n, inst.spec.m)) <= 1e-4);
    CHECK(oracle::rel_err(u0, model.segment(inst.spec.n, inst.spec.m)) <= 1e-4);

    // Warm starts: later solves need fewer iterations than the cold first one.
    CHECK(r.steps[10].iterations <= r.steps[0].iterations);
    CHECK_THROWS_AS(closed_loop(inst, -1, SolverSettings{}), ConfigError);
}
