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
#ifndef MFDEEPC_BENCH_HPP
#define MFDEEPC_BENCH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mfdeepc/common.hpp"

namespace mfdeepc {

constexpr double kBytesPerGB = 1e9;
constexpr double kBytesPerMB = 1e6;

/// Least 7-smooth length not below min_data_length(n, m, horizon).
Index plan_signal_length(Index n, Index m, Index horizon);

struct MemoryEstimate {
    std::uint64_t dense_s_bytes = 0;     ///< 8 (N - L + 1)^2
    std::uint64_t trajectory_bytes = 0;  ///< 8 N (n + m)
};

MemoryEstimate memory_estimate(Index n, Index m, Index horizon, Index length);

struct BenchRecord {
    Index n = 0;
    Index m = 0;
    Index horizon = 0;
    Index length = 0;
    Index total_iterations = 0;
    double total_seconds = 0.0;
    double mean_seconds = 0.0;  ///< total_seconds / total_iterations
    std::uint64_t operator_bytes = 0;
    std::uint64_t dense_bytes = 0;
    std::optional<double> kappa_s;
    std::optional<double> kappa_bs;
};

/// Fills the memory columns from memory_estimate and the operator size formula.
BenchRecord make_bench_record(Index n, Index m, Index horizon, Index length, Index total_iterations,
                              double total_seconds);

/// Bytes held by the spectral operator: d x N signal plus (N/2 + 1) x d complex spectrum.
std::uint64_t operator_memory_bytes(Index n, Index m, Index length);

/// Least-squares slope of log y against log x; empty with fewer than two
/// distinct abscissae or any nonpositive value.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

} // namespace mfdeepc

#endif // MFDEEPC_BENCH_HPP
