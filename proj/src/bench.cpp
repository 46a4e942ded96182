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
#include "mfdeepc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "mfdeepc/deepc_core.hpp"
#include "mfdeepc/spectral_ops.hpp"

namespace mfdeepc {

Index plan_signal_length(Index n, Index m, Index horizon)
{
    return next_smooth_length(min_data_length(n, m, horizon), 7);
}

MemoryEstimate memory_estimate(Index n, Index m, Index horizon, Index length)
{
    const auto cols = static_cast<std::uint64_t>(std::max<Index>(length - horizon + 1, 0));
    MemoryEstimate est;
    est.dense_s_bytes = sizeof(double) * cols * cols;
    est.trajectory_bytes = sizeof(double) * static_cast<std::uint64_t>(std::max<Index>(length, 0)) *
                           static_cast<std::uint64_t>(std::max<Index>(n + m, 0));
    return est;
}

std::uint64_t operator_memory_bytes(Index n, Index m, Index length)
{
    const auto d = static_cast<std::uint64_t>(n + m);
    const auto len = static_cast<std::uint64_t>(length);
    return sizeof(double) * d * len + sizeof(std::complex<double>) * d * (len / 2 + 1);
}

BenchRecord make_bench_record(Index n, Index m, Index horizon, Index length, Index total_iterations,
                              double total_seconds)
{
    BenchRecord rec;
    rec.n = n;
    rec.m = m;
    rec.horizon = horizon;
    rec.length = length;
    rec.total_iterations = total_iterations;
    rec.total_seconds = total_seconds;
    rec.mean_seconds = total_iterations > 0 ? total_seconds / static_cast<double>(total_iterations) : 0.0;
    rec.operator_bytes = operator_memory_bytes(n, m, length);
    rec.dense_bytes = memory_estimate(n, m, horizon, length).dense_s_bytes;
    return rec;
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument("loglog_slope: x and y differ in length");
    }
    const std::size_t count = x.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            return std::nullopt;
        }
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    if (count < 2) {
        return std::nullopt;
    }
    mx /= static_cast<double>(count);
    my /= static_cast<double>(count);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (!(sxx > 0.0)) {
        return std::nullopt;
    }
    return sxy / sxx;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("median: empty sample");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    return 0.5 * (upper + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

} // namespace mfdeepc
