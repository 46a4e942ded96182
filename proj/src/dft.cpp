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
#include "mfdeepc/dft.hpp"

#include <algorithm>
#include <mutex>
#include <new>

#include <fftw3.h>

namespace mfdeepc {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex()
{
    static std::mutex mutex;
    return mutex;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

namespace detail {

template <typename T>
AlignedBuffer<T>::AlignedBuffer(std::size_t count) : size_(count)
{
    if (count == 0) {
        return;
    }
    data_ = static_cast<T*>(fftw_malloc(sizeof(T) * count));
    if (data_ == nullptr) {
        throw std::bad_alloc();
    }
}

template <typename T>
AlignedBuffer<T>::~AlignedBuffer()
{
    if (data_ != nullptr) {
        fftw_free(data_);
    }
}

template <typename T>
AlignedBuffer<T>& AlignedBuffer<T>::operator=(AlignedBuffer&& other) noexcept
{
    if (this != &other) {
        if (data_ != nullptr) {
            fftw_free(data_);
        }
        data_ = other.data_;
        size_ = other.size_;
        other.data_ = nullptr;
        other.size_ = 0;
    }
    return *this;
}

template class AlignedBuffer<double>;
template class AlignedBuffer<Complex>;

struct DftPlans {
    fftw_plan c2c_forward = nullptr;
    fftw_plan c2c_backward = nullptr;
    fftw_plan r2c_single = nullptr;
    fftw_plan c2r_single = nullptr;

    explicit DftPlans(Index length)
    {
        const int n = static_cast<int>(length);
        AlignedBuffer<Complex> cin(static_cast<std::size_t>(n));
        AlignedBuffer<Complex> cout(static_cast<std::size_t>(n));
        AlignedBuffer<double> rbuf(static_cast<std::size_t>(n));

        std::lock_guard<std::mutex> lock(planner_mutex());
        c2c_forward = fftw_plan_dft_1d(n, as_fftw(cin.data()), as_fftw(cout.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        c2c_backward = fftw_plan_dft_1d(n, as_fftw(cin.data()), as_fftw(cout.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
        r2c_single = fftw_plan_dft_r2c_1d(n, rbuf.data(), as_fftw(cout.data()), FFTW_ESTIMATE);
        c2r_single = fftw_plan_dft_c2r_1d(n, as_fftw(cin.data()), rbuf.data(), FFTW_ESTIMATE);
        if (!c2c_forward || !c2c_backward || !r2c_single || !c2r_single) {
            destroy();
            throw std::runtime_error("DftProvider: FFT planning failed");
        }
    }

    ~DftPlans()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        destroy();
    }

    void destroy()
    {
        for (fftw_plan* p : {&c2c_forward, &c2c_backward, &r2c_single, &c2r_single}) {
            if (*p != nullptr) {
                fftw_destroy_plan(*p);
                *p = nullptr;
            }
        }
    }
};

} // namespace detail

DftProvider::DftProvider(Index length) : length_(length)
{
    if (length < 1) {
        throw std::invalid_argument("DftProvider: length must be positive");
    }
    plans_ = std::make_unique<detail::DftPlans>(length);
}

DftProvider::~DftProvider() = default;
DftProvider::DftProvider(DftProvider&&) noexcept = default;
DftProvider& DftProvider::operator=(DftProvider&&) noexcept = default;

ComplexVector DftProvider::forward(const Eigen::Ref<const ComplexVector>& v) const
{
    return forward_block(v);
}

ComplexVector DftProvider::inverse(const Eigen::Ref<const ComplexVector>& v) const
{
    return inverse_block(v);
}

ComplexMatrix DftProvider::forward_block(const Eigen::Ref<const ComplexMatrix>& v) const
{
    require_size(v.rows(), length_, "DftProvider::forward_block");
    const auto n = static_cast<std::size_t>(length_);
    detail::AlignedBuffer<Complex> in(n);
    detail::AlignedBuffer<Complex> out(n);
    ComplexMatrix result(v.rows(), v.cols());
    for (Index c = 0; c < v.cols(); ++c) {
        Eigen::Map<ComplexVector>(in.data(), length_) = v.col(c);
        fftw_execute_dft(plans_->c2c_forward, as_fftw(in.data()), as_fftw(out.data()));
        result.col(c) = Eigen::Map<const ComplexVector>(out.data(), length_);
    }
    return result;
}

ComplexMatrix DftProvider::inverse_block(const Eigen::Ref<const ComplexMatrix>& v) const
{
    require_size(v.rows(), length_, "DftProvider::inverse_block");
    const auto n = static_cast<std::size_t>(length_);
    detail::AlignedBuffer<Complex> in(n);
    detail::AlignedBuffer<Complex> out(n);
    ComplexMatrix result(v.rows(), v.cols());
    const double scale = 1.0 / static_cast<double>(length_);
    for (Index c = 0; c < v.cols(); ++c) {
        Eigen::Map<ComplexVector>(in.data(), length_) = v.col(c);
        fftw_execute_dft(plans_->c2c_backward, as_fftw(in.data()), as_fftw(out.data()));
        result.col(c) = scale * Eigen::Map<const ComplexVector>(out.data(), length_);
    }
    return result;
}

void DftProvider::complex_forward(Complex* in, Complex* out) const
{
    fftw_execute_dft(plans_->c2c_forward, as_fftw(in), as_fftw(out));
}

void DftProvider::complex_backward(Complex* in, Complex* out) const
{
    fftw_execute_dft(plans_->c2c_backward, as_fftw(in), as_fftw(out));
}

void DftProvider::real_forward(double* in, Complex* out) const
{
    fftw_execute_dft_r2c(plans_->r2c_single, in, as_fftw(out));
}

void DftProvider::real_backward(Complex* in, double* out) const
{
    fftw_execute_dft_c2r(plans_->c2r_single, as_fftw(in), out);
}

} // namespace mfdeepc
