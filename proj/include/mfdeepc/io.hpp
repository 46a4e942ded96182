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
#ifndef MFDEEPC_IO_HPP
#define MFDEEPC_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfdeepc/experiments.hpp"

namespace mfdeepc {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double value);

/// One comment line, header x0..x{n-1},u0..u{m-1}, one row per time step.
void write_trajectory_csv(const fs::path& path, const Trajectory& traj, const std::string& comment);
Trajectory read_trajectory_csv(const fs::path& path);

/// Writes <dir>/<stem>.csv (data trajectory) and <dir>/<stem>.json (instance metadata).
fs::path write_instance(const fs::path& dir, const std::string& stem, const Instance& inst);
/// Loads an instance JSON and the trajectory CSV it names (relative to the JSON file).
Instance read_instance(const fs::path& json_path);

/// outer_k,inner_j,residual_norm,grad_norm,alpha,elapsed_s
void write_report_csv(const fs::path& path, const SolveReport& report);
nlohmann::json report_summary(const SolveReport& report);

/// method,iteration,residual_norm
void write_residual_csv(const fs::path& path, const std::vector<ResidualRow>& rows);
/// n,m,L,N,total_iterations,total_seconds,mean_seconds_per_iteration,operator_bytes,dense_s_bytes,kappa_s,kappa_bs
void write_bench_csv(const fs::path& path, const std::vector<ScalingSeries>& series);
/// n,m,L,N,rank,bfgs_iterations,kappa_s,kappa_bs
void write_condition_csv(const fs::path& path, const std::vector<ConditionPoint>& points);
/// step,error,iterations,status,x0..,u0..
void write_closed_loop_csv(const fs::path& path, const ClosedLoopResult& result);

void write_json(const fs::path& path, const nlohmann::json& value);
nlohmann::json read_json(const fs::path& path);

} // namespace mfdeepc

#endif // MFDEEPC_IO_HPP
