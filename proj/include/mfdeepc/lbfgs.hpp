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
#ifndef MFDEEPC_LBFGS_HPP
#define MFDEEPC_LBFGS_HPP

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mfdeepc/common.hpp"

namespace mfdeepc {

enum class SolveStatus { converged, max_iterations, degenerate_curvature };

inline const char* to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::converged:
        return "converged";
    case SolveStatus::max_iterations:
        return "max-iterations";
    case SolveStatus::degenerate_curvature:
        return "degenerate-curvature";
    }
    return "unknown";
}

struct LbfgsConfig {
    Index window = 30;
    double grad_tol = 1e-7;
    Index max_inner = 100000;
    /// Initial estimate of the Hessian norm for the curvature test; the
    /// running maximum of observed Rayleigh quotients takes over afterwards.
    double curvature_scale = 1.0;
    /// Replace the recurrence gradient by a fresh evaluation every this many steps.
    Index gradient_refresh = 50;

    static constexpr Index kFullMemory = std::numeric_limits<Index>::max();

    void validate() const
    {
        if (window < 1) {
            throw std::invalid_argument("LbfgsConfig: window must be >= 1");
        }
        if (!(grad_tol > 0.0)) {
            throw std::invalid_argument("LbfgsConfig: grad_tol must be positive");
        }
        if (max_inner < 0) {
            throw std::invalid_argument("LbfgsConfig: max_inner must be nonnegative");
        }
        if (gradient_refresh < 1) {
            throw std::invalid_argument("LbfgsConfig: gradient_refresh must be >= 1");
        }
    }
};

enum class InitialScaling {
    identity,  ///< H0 = I
    gamma      ///< H0 = (s^T y / y^T y) I from the newest pair
};

/**
 * @brief Ring buffer of the newest curvature pairs (s_j, y_j, rho_j).
 *
 * Pairs with s^T y <= eps |s| |y| are rejected, so every stored rho is positive.
 */
template <typename Scalar>
class LbfgsMemory {
public:
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct Pair {
        VectorType s;
        VectorType y;
        Scalar rho;
    };

    explicit LbfgsMemory(Index window, InitialScaling scaling = InitialScaling::gamma)
        : window_(window), scaling_(scaling)
    {
        if (window < 1) {
            throw std::invalid_argument("LbfgsMemory: window must be >= 1");
        }
    }

    bool push(VectorType s, VectorType y)
    {
        const Scalar sy = s.dot(y);
        if (!(sy > std::numeric_limits<Scalar>::epsilon() * s.norm() * y.norm())) {
            return false;
        }
        if (static_cast<Index>(pairs_.size()) == window_) {
            pairs_.pop_front();
        }
        pairs_.push_back(Pair{std::move(s), std::move(y), Scalar(1) / sy});
        return true;
    }

    void clear() { pairs_.clear(); }
    Index size() const { return static_cast<Index>(pairs_.size()); }
    bool empty() const { return pairs_.empty(); }
    Index window() const { return window_; }
    InitialScaling scaling() const { return scaling_; }
    const std::deque<Pair>& pairs() const { return pairs_; }

    Scalar initial_scaling() const
    {
        if (pairs_.empty() || scaling_ == InitialScaling::identity) {
            return Scalar(1);
        }
        const Pair& last = pairs_.back();
        return Scalar(1) / (last.rho * last.y.squaredNorm());
    }

private:
    Index window_;
    InitialScaling scaling_;
    std::deque<Pair> pairs_;
};

/// Returns -H g for the limited-memory inverse Hessian approximation H,
/// column by column when g has several columns.
template <typename Scalar, typename Derived>
typename Derived::PlainObject two_loop_apply(const LbfgsMemory<Scalar>& memory, const Eigen::MatrixBase<Derived>& g)
{
    using Plain = typename Derived::PlainObject;
    using RowType = Eigen::Matrix<Scalar, 1, Derived::ColsAtCompileTime>;

    Plain q = g;
    const auto& pairs = memory.pairs();
    std::vector<RowType> alphas(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        alphas[i].noalias() = pairs[i].rho * (pairs[i].s.transpose() * q);
        q.noalias() -= pairs[i].y * alphas[i];
    }
    q *= memory.initial_scaling();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const RowType beta = pairs[i].rho * (pairs[i].y.transpose() * q);
        q.noalias() += pairs[i].s * (alphas[i] - beta);
    }
    return -q;
}

template <typename Scalar>
struct LineSearchResult {
    Scalar alpha = 0;
    Scalar curvature = 0;  ///< p^T Hess p
    bool degenerate = false;
};

/// Minimizer of the quadratic along p given hp = Hess p:
/// alpha = -g^T p / p^T Hess p. Flags degenerate curvature when
/// p^T Hess p <= 1e-14 |p|^2 scale while g^T p != 0.
template <typename DerivedG, typename DerivedP, typename DerivedH>
LineSearchResult<typename DerivedG::Scalar> exact_line_search(const Eigen::MatrixBase<DerivedG>& g,
                                                              const Eigen::MatrixBase<DerivedP>& p,
                                                              const Eigen::MatrixBase<DerivedH>& hp,
                                                              typename DerivedG::Scalar scale = 1)
{
    using Scalar = typename DerivedG::Scalar;
    LineSearchResult<Scalar> result;
    const Scalar p_norm2 = p.squaredNorm();
    if (p_norm2 == Scalar(0)) {
        throw std::invalid_argument("exact_line_search: zero direction");
    }
    const Scalar slope = g.dot(p);
    result.curvature = p.dot(hp);
    const Scalar tol = Scalar(1e-14) * p_norm2 * scale;
    if (result.curvature <= tol) {
        result.degenerate = slope != Scalar(0);
        return result;
    }
    result.alpha = -slope / result.curvature;
    return result;
}

template <typename Scalar>
struct InnerResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gradient;  ///< freshly evaluated at z
    Index iterations = 0;
    Index hess_matvecs = 0;
    Index grad_evals = 0;
    SolveStatus status = SolveStatus::max_iterations;
};

enum class DirectionRule { lbfgs, steepest_descent };

/**
 * Descent on a convex quadratic with exact line search.
 *
 * The gradient is carried by the recurrence g += alpha * Hess p, refreshed
 * every `gradient_refresh` steps and re-evaluated before convergence is
 * declared. `observer(j, z, g, alpha)` runs once at j = 0 and after every step.
 */
template <typename Scalar, typename GradFn, typename HessFn, typename Observer>
InnerResult<Scalar> descent_minimize(DirectionRule rule, GradFn&& gradient, HessFn&& hessian,
                                     Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z0, const LbfgsConfig& config,
                                     LbfgsMemory<Scalar>& memory, Observer&& observer)
{
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    config.validate();

    InnerResult<Scalar> out;
    out.z = std::move(z0);
    VectorType g = gradient(out.z);
    ++out.grad_evals;
    bool fresh = true;
    Scalar scale = static_cast<Scalar>(config.curvature_scale);
    observer(Index{0}, out.z, g, Scalar(0));

    Index j = 0;
    for (;;) {
        if (g.norm() <= config.grad_tol) {
            if (!fresh) {
                g = gradient(out.z);
                ++out.grad_evals;
                fresh = true;
            }
            if (g.norm() <= config.grad_tol) {
                out.status = SolveStatus::converged;
                break;
            }
        }
        if (j >= config.max_inner) {
            out.status = SolveStatus::max_iterations;
            break;
        }

        VectorType p = rule == DirectionRule::lbfgs ? VectorType(two_loop_apply(memory, g)) : VectorType(-g);
        if (!(g.dot(p) < Scalar(0))) {
            // Round-off can spoil the approximation; restart from steepest descent.
            memory.clear();
            p = -g;
        }
        VectorType hp = hessian(p);
        ++out.hess_matvecs;
        const auto step = exact_line_search(g, p, hp, scale);
        if (step.degenerate || step.alpha == Scalar(0)) {
            out.status = SolveStatus::degenerate_curvature;
            break;
        }
        scale = std::max(scale, step.curvature / p.squaredNorm());

        VectorType s = step.alpha * p;
        VectorType y = step.alpha * hp;
        out.z += s;
        g += y;
        fresh = false;
        if (rule == DirectionRule::lbfgs) {
            memory.push(std::move(s), std::move(y));
        }
        ++j;
        if (j % config.gradient_refresh == 0) {
            g = gradient(out.z);
            ++out.grad_evals;
            fresh = true;
        }
        observer(j, out.z, g, step.alpha);
    }

    if (!fresh) {
        g = gradient(out.z);
        ++out.grad_evals;
    }
    out.gradient = std::move(g);
    out.iterations = j;
    return out;
}

template <typename Scalar, typename GradFn, typename HessFn>
InnerResult<Scalar> lbfgs_minimize(GradFn&& gradient, HessFn&& hessian, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z0,
                                   const LbfgsConfig& config)
{
    LbfgsMemory<Scalar> memory(config.window);
    return descent_minimize<Scalar>(DirectionRule::lbfgs, gradient, hessian, std::move(z0), config, memory,
                                    [](Index, const auto&, const auto&, Scalar) {});
}

} // namespace mfdeepc

#endif // MFDEEPC_LBFGS_HPP
