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
#include "mfdeepc/spectral_ops.hpp"

#include <algorithm>
#include <limits>

namespace mfdeepc {

namespace {

using RealBuffer = detail::AlignedBuffer<double>;
using ComplexBuffer = detail::AlignedBuffer<Complex>;

bool is_smooth(Index value, Index largest_prime)
{
    for (Index p = 2; p <= largest_prime && value > 1; ++p) {
        while (value % p == 0) {
            value /= p;
        }
    }
    return value == 1;
}

} // namespace

SpectralHankelOperator::SpectralHankelOperator(Matrix signal, Index depth)
    : signal_(std::move(signal)), depth_(depth)
{
    const Index n = signal_.cols();
    const Index d = signal_.rows();
    if (d < 1 || n < 1) {
        throw std::invalid_argument("SpectralHankelOperator: empty signal");
    }
    if (depth < 1 || depth > n) {
        throw std::invalid_argument("SpectralHankelOperator: depth must satisfy 1 <= L <= N");
    }
    dft_ = std::make_shared<const DftProvider>(n);

    const Index half = dft_->half_length();
    const Index rs = dft_->real_stride();
    const Index hs = dft_->half_stride();
    RealBuffer rotated(static_cast<std::size_t>(rs));
    ComplexBuffer spectrum(static_cast<std::size_t>(hs));
    spectrum_.resize(half, d);

    for (Index c = 0; c < d; ++c) {
        for (Index j = 0; j < n; ++j) {
            rotated.data()[j] = signal_(c, (j + depth - 1) % n);
        }
        dft_->real_forward(rotated.data(), spectrum.data());
        spectrum_.col(c) = Eigen::Map<const ComplexVector>(spectrum.data(), half);
    }
}

ComplexVector SpectralHankelOperator::block_spectrum(Index k) const
{
    const Index n = signal_length();
    if (k < 0 || k >= n) {
        throw std::out_of_range("block_spectrum: frequency index out of range");
    }
    if (k < spectrum_.rows()) {
        return spectrum_.row(k).transpose();
    }
    return spectrum_.row(n - k).transpose().conjugate();
}

ComplexMatrix SpectralHankelOperator::full_block_spectrum() const
{
    ComplexMatrix full(channels(), signal_length());
    for (Index k = 0; k < signal_length(); ++k) {
        full.col(k) = block_spectrum(k);
    }
    return full;
}

void SpectralHankelOperator::apply(const VectorRef& z, Eigen::Ref<Vector> out) const
{
    require_size(z.size(), cols(), "hankel_matvec: z");
    require_size(out.size(), rows(), "hankel_matvec: output");

    const Index n = signal_length();
    const Index d = channels();
    const Index half = dft_->half_length();
    const Index rs = dft_->real_stride();
    const Index hs = dft_->half_stride();
    const double scale = 1.0 / static_cast<double>(n);

    // 1) zero-pad and transform the column weights once.
    RealBuffer padded(static_cast<std::size_t>(rs));
    Eigen::Map<Vector> v(padded.data(), n);
    v.head(cols()) = z;
    v.tail(n - cols()).setZero();
    ComplexBuffer v_hat(static_cast<std::size_t>(hs));
    dft_->real_forward(padded.data(), v_hat.data());
    Eigen::Map<const ComplexVector> vh(v_hat.data(), half);

    // 2) multiply by the channel spectra and return to the time domain, two
    //    real channels per complex transform; 3) keep the first L samples, reversed.
    ComplexBuffer packed(static_cast<std::size_t>(n));
    ComplexBuffer time(static_cast<std::size_t>(n));
    const Complex* t = time.data();
    Complex* y = packed.data();
    Index c = 0;
    for (; c + 1 < d; c += 2) {
        const Complex* la = spectrum_.col(c).data();
        const Complex* lb = spectrum_.col(c + 1).data();
        const Complex* vk = vh.data();
        for (Index k = 0; k < half; ++k) {
            const Complex pa = std::conj(la[k]) * vk[k];
            const Complex pb = std::conj(lb[k]) * vk[k];
            y[k] = pa + Complex(-pb.imag(), pb.real());
            if (k > 0 && n - k >= half) {
                y[n - k] = std::conj(pa) + Complex(pb.imag(), pb.real());
            }
        }
        dft_->complex_backward(packed.data(), time.data());
        for (Index i = 0; i < depth_; ++i) {
            out(i * d + c) = scale * t[depth_ - 1 - i].real();
            out(i * d + c + 1) = scale * t[depth_ - 1 - i].imag();
        }
    }
    if (c < d) {
        Eigen::Map<ComplexVector> prod(packed.data(), half);
        prod = spectrum_.col(c).conjugate().cwiseProduct(vh);
        RealBuffer result(static_cast<std::size_t>(rs));
        dft_->real_backward(packed.data(), result.data());
        for (Index i = 0; i < depth_; ++i) {
            out(i * d + c) = scale * result.data()[depth_ - 1 - i];
        }
    }
}

void SpectralHankelOperator::apply_transpose(const VectorRef& y, Eigen::Ref<Vector> out) const
{
    require_size(y.size(), rows(), "hankel_rmatvec: y");
    require_size(out.size(), cols(), "hankel_rmatvec: output");

    const Index n = signal_length();
    const Index d = channels();
    const Index half = dft_->half_length();
    const Index rs = dft_->real_stride();
    const Index hs = dft_->half_stride();
    const double scale = 1.0 / static_cast<double>(n);

    ComplexBuffer accumulated(static_cast<std::size_t>(hs));
    Eigen::Map<ComplexVector> acc(accumulated.data(), half);
    acc.setZero();
    Complex* ac = accumulated.data();

    // Only the first L samples per channel are ever nonzero and c2c keeps its
    // input, so the tail stays zero across channels.
    ComplexBuffer packed(static_cast<std::size_t>(n));
    std::fill_n(packed.data(), n, Complex(0.0, 0.0));
    ComplexBuffer spectrum(static_cast<std::size_t>(n));
    const Complex* zk = spectrum.data();
    Index c = 0;
    for (; c + 1 < d; c += 2) {
        for (Index r = 0; r < depth_; ++r) {
            packed.data()[r] = Complex(y((depth_ - 1 - r) * d + c), y((depth_ - 1 - r) * d + c + 1));
        }
        dft_->complex_forward(packed.data(), spectrum.data());
        const Complex* la = spectrum_.col(c).data();
        const Complex* lb = spectrum_.col(c + 1).data();
        for (Index k = 0; k < half; ++k) {
            const Complex mirror = std::conj(zk[k == 0 ? 0 : n - k]);
            const Complex xa = 0.5 * (zk[k] + mirror);
            const Complex diff = 0.5 * (zk[k] - mirror);
            const Complex xb(diff.imag(), -diff.real());
            ac[k] += la[k] * xa + lb[k] * xb;
        }
    }
    if (c < d) {
        RealBuffer embedded(static_cast<std::size_t>(rs));
        std::fill_n(embedded.data(), rs, 0.0);
        for (Index r = 0; r < depth_; ++r) {
            embedded.data()[r] = y((depth_ - 1 - r) * d + c);
        }
        ComplexBuffer embedded_hat(static_cast<std::size_t>(hs));
        dft_->real_forward(embedded.data(), embedded_hat.data());
        acc += spectrum_.col(c).cwiseProduct(Eigen::Map<const ComplexVector>(embedded_hat.data(), half));
    }

    RealBuffer result(static_cast<std::size_t>(rs));
    dft_->real_backward(accumulated.data(), result.data());
    out = scale * Eigen::Map<const Vector>(result.data(), cols());
}

ComplexVector SpectralHankelOperator::apply_circulant(const Eigen::Ref<const ComplexVector>& v) const
{
    require_size(v.size(), signal_length(), "apply_circulant: v");
    const Index n = signal_length();
    const Index d = channels();
    const ComplexVector v_hat = dft_->inverse(v);
    const ComplexMatrix lambda = full_block_spectrum();  // d x N
    ComplexMatrix scaled(n, d);
    for (Index k = 0; k < n; ++k) {
        scaled.row(k) = v_hat(k) * lambda.col(k).transpose();
    }
    const ComplexMatrix blocks = dft_->forward_block(scaled);  // row r = (C v)_r
    ComplexVector out(n * d);
    for (Index r = 0; r < n; ++r) {
        out.segment(r * d, d) = blocks.row(r).transpose();
    }
    return out;
}

std::size_t SpectralHankelOperator::memory_bytes() const
{
    return sizeof(double) * static_cast<std::size_t>(signal_.size()) +
           sizeof(Complex) * static_cast<std::size_t>(spectrum_.size());
}

SpectralHankelOperator build_operator(const MatrixRef& signal, Index depth)
{
    return SpectralHankelOperator(Matrix(signal), depth);
}

Vector hankel_matvec(const SpectralHankelOperator& op, const VectorRef& z)
{
    Vector out(op.rows());
    op.apply(z, out);
    return out;
}

Vector hankel_rmatvec(const SpectralHankelOperator& op, const VectorRef& y)
{
    Vector out(op.cols());
    op.apply_transpose(y, out);
    return out;
}

ComplexVector hankel_matvec_complex(const SpectralHankelOperator& op, const VectorRef& z)
{
    require_size(z.size(), op.cols(), "hankel_matvec_complex: z");
    const Index d = op.channels();
    const Index depth = op.depth();
    ComplexVector padded = ComplexVector::Zero(op.signal_length());
    padded.head(op.cols()) = z.cast<Complex>();
    const ComplexVector cv = op.apply_circulant(padded);
    ComplexVector out(op.rows());
    for (Index i = 0; i < depth; ++i) {
        out.segment(i * d, d) = cv.segment((depth - 1 - i) * d, d);
    }
    return out;
}

Matrix dense_hankel(const MatrixRef& signal, Index depth, bool allow_large)
{
    const Index n = signal.cols();
    const Index d = signal.rows();
    if (depth < 1 || depth > n) {
        throw std::invalid_argument("dense_hankel: depth must satisfy 1 <= L <= N");
    }
    const Index cols = n - depth + 1;
    if (!allow_large && d * depth * cols > kDenseHankelGuard) {
        throw SizeGuardError("dense_hankel: " + std::to_string(d * depth * cols) +
                             " entries exceed the dense guard");
    }
    Matrix hankel(d * depth, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < depth; ++i) {
            hankel.block(i * d, j, d, 1) = signal.col(i + j);
        }
    }
    return hankel;
}

Index next_smooth_length(Index minimum, Index largest_prime)
{
    if (largest_prime < 2) {
        throw std::invalid_argument("next_smooth_length: largest_prime must be >= 2");
    }
    if (minimum < 1) {
        throw std::invalid_argument("next_smooth_length: minimum must be positive");
    }
    Index candidate = minimum;
    while (!is_smooth(candidate, largest_prime)) {
        ++candidate;
    }
    return candidate;
}

} // namespace mfdeepc
