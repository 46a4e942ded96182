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
#ifndef MFDEEPC_SPECTRAL_OPS_HPP
#define MFDEEPC_SPECTRAL_OPS_HPP

#include <cstddef>
#include <memory>

#include "mfdeepc/common.hpp"
#include "mfdeepc/dft.hpp"

namespace mfdeepc {

///
/// ### SpectralHankelOperator
///
/// Implicit block Hankel matrix H_L(w) of a signal w_0, ..., w_{N-1} in R^d:
///
///     H_L(w) = [ w_0      w_1   ...  w_{N-L}
///                w_1      w_2   ...  w_{N-L+1}
///                ...
///                w_{L-1}  w_L   ...  w_{N-1}   ]   in R^{dL x (N-L+1)}
///
/// Reversing the block rows gives a block Toeplitz matrix T, which is the
/// leading (dL) x (N-L+1) corner of the block circulant C whose first block
/// row is the rotated generator g = (w_{L-1}, ..., w_{N-1}, w_0, ..., w_{L-2}).
/// C factorizes as (F (x) I_d) Lambda F^{-1} with Lambda_k the block DFT of g,
/// so products with H and H^T cost O(N d log N) and only the signal and the
/// spectrum are stored.
///
/// The real-data products use half spectra: Lambda_{N-k} = conj(Lambda_k).
///
class SpectralHankelOperator {
public:
    /// signal is d x N, column k = w_k. Requires 1 <= depth <= N.
    SpectralHankelOperator(Matrix signal, Index depth);

    Index depth() const { return depth_; }
    Index channels() const { return signal_.rows(); }
    Index signal_length() const { return signal_.cols(); }
    Index rows() const { return channels() * depth_; }
    Index cols() const { return signal_length() - depth_ + 1; }

    const Matrix& signal() const { return signal_; }
    const DftProvider& dft() const { return *dft_; }

    /// Half spectrum, (N/2 + 1) x d; column c holds channel c of Lambda_0..Lambda_{N/2}.
    const ComplexMatrix& half_spectrum() const { return spectrum_; }
    /// Lambda_k as a d-vector for any 0 <= k < N.
    ComplexVector block_spectrum(Index k) const;
    /// d x N matrix with column k equal to Lambda_k.
    ComplexMatrix full_block_spectrum() const;

    /// out = H z, z of length cols(), out of length rows().
    void apply(const VectorRef& z, Eigen::Ref<Vector> out) const;
    /// out = H^T y, y of length rows(), out of length cols().
    void apply_transpose(const VectorRef& y, Eigen::Ref<Vector> out) const;

    /// C v for a length-N vector through the full complex factorization.
    /// Returns the Nd result with block r = (C v)_r. Reference path only.
    ComplexVector apply_circulant(const Eigen::Ref<const ComplexVector>& v) const;

    /// Bytes owned by the operator: signal plus spectrum. Workspace used by a
    /// single product is O(N) and not counted.
    std::size_t memory_bytes() const;

private:
    Matrix signal_;
    Index depth_;
    std::shared_ptr<const DftProvider> dft_;
    ComplexMatrix spectrum_;
};

SpectralHankelOperator build_operator(const MatrixRef& signal, Index depth);

Vector hankel_matvec(const SpectralHankelOperator& op, const VectorRef& z);
Vector hankel_rmatvec(const SpectralHankelOperator& op, const VectorRef& y);

/// H z evaluated entirely through complex transforms, before the imaginary
/// part is dropped. Used to check the realness of the factorization.
ComplexVector hankel_matvec_complex(const SpectralHankelOperator& op, const VectorRef& z);

constexpr Index kDenseHankelGuard = 10'000'000;

/// Dense dL x (N-L+1) Hankel matrix, block (i, j) = w_{i+j}.
/// Throws SizeGuardError above kDenseHankelGuard entries unless allow_large.
Matrix dense_hankel(const MatrixRef& signal, Index depth, bool allow_large = false);

/// Smallest integer >= minimum whose prime factors are all <= largest_prime.
Index next_smooth_length(Index minimum, Index largest_prime = 7);

} // namespace mfdeepc

#endif // MFDEEPC_SPECTRAL_OPS_HPP
