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
#ifndef MFDEEPC_DFT_HPP
#define MFDEEPC_DFT_HPP

#include <cstddef>
#include <memory>

#include "mfdeepc/common.hpp"

namespace mfdeepc {

namespace detail {
struct DftPlans;

/// Owning buffer from the FFT backend's aligned allocator.
template <typename T>
class AlignedBuffer {
public:
    AlignedBuffer() = default;
    explicit AlignedBuffer(std::size_t count);
    ~AlignedBuffer();
    AlignedBuffer(AlignedBuffer&& other) noexcept : data_(other.data_), size_(other.size_)
    {
        other.data_ = nullptr;
        other.size_ = 0;
    }
    AlignedBuffer& operator=(AlignedBuffer&& other) noexcept;
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;

    T* data() { return data_; }
    const T* data() const { return data_; }
    std::size_t size() const { return size_; }

private:
    T* data_ = nullptr;
    std::size_t size_ = 0;
};
} // namespace detail

/**
 * @brief Discrete Fourier transforms of a fixed length N.
 *
 * Convention: forward(v)_k = sum_j exp(-2 pi i k j / N) v_j; inverse carries
 * the 1/N factor so that inverse(forward(v)) = v. Block variants act on an
 * N x d matrix column by column, which is F (x) I_d with the d channels
 * stored contiguously per channel.
 *
 * Real-input helpers use the half spectrum (N/2 + 1 bins) and operate on
 * raw aligned buffers; they back the hot matvec path. Plans are immutable
 * after construction and every transform call uses caller-owned storage, so
 * one provider may be shared between threads.
 */
class DftProvider {
public:
    explicit DftProvider(Index length);
    ~DftProvider();
    DftProvider(DftProvider&&) noexcept;
    DftProvider& operator=(DftProvider&&) noexcept;
    DftProvider(const DftProvider&) = delete;
    DftProvider& operator=(const DftProvider&) = delete;

    Index length() const { return length_; }
    Index half_length() const { return length_ / 2 + 1; }
    /// Buffer sizes for the real helpers, rounded up to 32-byte multiples.
    Index real_stride() const { return (length_ + 3) / 4 * 4; }
    Index half_stride() const { return (half_length() + 1) / 2 * 2; }

    ComplexVector forward(const Eigen::Ref<const ComplexVector>& v) const;
    ComplexVector inverse(const Eigen::Ref<const ComplexVector>& v) const;
    ComplexMatrix forward_block(const Eigen::Ref<const ComplexMatrix>& v) const;
    ComplexMatrix inverse_block(const Eigen::Ref<const ComplexMatrix>& v) const;

    /// Unnormalized out-of-place c2c of length N; `in` is preserved. Both
    /// buffers must come from detail::AlignedBuffer.
    void complex_forward(Complex* in, Complex* out) const;
    /// As complex_forward with the exp(+2 pi i k j / N) kernel.
    void complex_backward(Complex* in, Complex* out) const;
    /// Unnormalized r2c into the half spectrum. Both buffers must come from
    /// detail::AlignedBuffer.
    void real_forward(double* in, Complex* out) const;
    /// Unnormalized c2r (exp(+2 pi i k j / N) kernel); destroys `in`.
    void real_backward(Complex* in, double* out) const;

private:
    Index length_;
    std::unique_ptr<detail::DftPlans> plans_;
};

} // namespace mfdeepc

#endif // MFDEEPC_DFT_HPP
