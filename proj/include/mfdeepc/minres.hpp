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
#ifndef MFDEEPC_MINRES_HPP
#define MFDEEPC_MINRES_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "mfdeepc/lbfgs.hpp"

namespace mfdeepc {

template <typename Scalar>
struct MinresResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    Index iterations = 0;
    Scalar residual_norm = 0;  ///< recurrence estimate of |b - A x|
    SolveStatus status = SolveStatus::max_iterations;
    bool breakdown = false;
};

/**
 * Unpreconditioned MINRES (Paige & Saunders) for a symmetric, possibly
 * indefinite operator, starting from x = 0.
 *
 * `observer(k, x, residual_estimate)` runs at k = 0 and after every step.
 * A Lanczos breakdown with the residual still above tol is reported as
 * degenerate_curvature with `breakdown` set.
 */
template <typename Scalar, typename Op, typename Observer>
MinresResult<Scalar> minres(Op&& apply, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, Scalar tol,
                            Index max_iter, Observer&& observer)
{
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Index n = b.size();
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    MinresResult<Scalar> out;
    out.x = VectorType::Zero(n);
    const Scalar beta1 = b.norm();
    out.residual_norm = beta1;
    observer(Index{0}, out.x, beta1);
    if (beta1 <= tol) {
        out.status = SolveStatus::converged;
        return out;
    }

    VectorType r1 = b;
    VectorType r2 = b;
    VectorType y = b;
    VectorType v(n);
    VectorType w = VectorType::Zero(n);
    VectorType w1(n);
    VectorType w2 = VectorType::Zero(n);

    Scalar oldb = 0;
    Scalar beta = beta1;
    Scalar dbar = 0;
    Scalar epsln = 0;
    Scalar phibar = beta1;
    Scalar cs = -1;
    Scalar sn = 0;

    for (Index itn = 1; itn <= max_iter; ++itn) {
        v = y / beta;
        y = apply(v);
        if (itn >= 2) {
            y -= (beta / oldb) * r1;
        }
        const Scalar alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1.swap(r2);
        r2 = y;
        oldb = beta;
        beta = r2.norm();

        const Scalar oldeps = epsln;
        const Scalar delta = cs * dbar + sn * alfa;
        const Scalar gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;

        const Scalar gamma = std::max(std::hypot(gbar, beta), eps);
        cs = gbar / gamma;
        sn = beta / gamma;
        const Scalar phi = cs * phibar;
        phibar = sn * phibar;

        w1.swap(w2);
        w2.swap(w);
        w = (v - oldeps * w1 - delta * w2) / gamma;
        out.x += phi * w;

        out.iterations = itn;
        out.residual_norm = phibar;
        observer(itn, out.x, phibar);

        if (phibar <= tol) {
            out.status = SolveStatus::converged;
            return out;
        }
        if (beta <= eps * beta1) {
            out.breakdown = true;
            out.status = SolveStatus::degenerate_curvature;
            return out;
        }
    }
    out.status = SolveStatus::max_iterations;
    return out;
}

} // namespace mfdeepc

#endif // MFDEEPC_MINRES_HPP
