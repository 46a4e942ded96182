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
#include "mfdeepc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfdeepc {

namespace {

using nlohmann::json;

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

json matrix_json(const MatrixRef& mat)
{
    json rows = json::array();
    for (Index i = 0; i < mat.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < mat.cols(); ++j) {
            row.push_back(mat(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const VectorRef& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Matrix json_matrix(const json& j, Index rows, Index cols, const char* what)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
        throw ConfigError(std::string("instance: ") + what + " must have " + std::to_string(rows) + " rows");
    }
    Matrix mat(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ConfigError(std::string("instance: ") + what + " must have " + std::to_string(cols) + " columns");
        }
        for (Index c = 0; c < cols; ++c) {
            mat(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return mat;
}

Vector json_vector(const json& j, Index size, const char* what)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != size) {
        throw ConfigError(std::string("instance: ") + what + " must have length " + std::to_string(size));
    }
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

std::string optional_cell(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string();
}

} // namespace

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, const std::string& comment)
{
    std::ofstream out = open_out(path);
    out << "# " << comment << '\n';
    const Index n = traj.state_dim();
    const Index m = traj.input_dim();
    for (Index i = 0; i < n; ++i) {
        out << (i ? "," : "") << 'x' << i;
    }
    for (Index i = 0; i < m; ++i) {
        out << (n + i ? "," : "") << 'u' << i;
    }
    out << '\n';
    for (Index k = 0; k < traj.length(); ++k) {
        for (Index i = 0; i < n; ++i) {
            out << (i ? "," : "") << format_double(traj.states(i, k));
        }
        for (Index i = 0; i < m; ++i) {
            out << (n + i ? "," : "") << format_double(traj.inputs(i, k));
        }
        out << '\n';
    }
}

Trajectory read_trajectory_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            header.push_back(cell);
        }
        break;
    }
    Index n = 0;
    Index m = 0;
    for (const std::string& h : header) {
        if (h == "x" + std::to_string(n) && m == 0) {
            ++n;
        } else if (h == "u" + std::to_string(m)) {
            ++m;
        } else {
            throw ConfigError(path.string() + ": unexpected column '" + h + "'");
        }
    }
    if (n == 0 || m == 0) {
        throw ConfigError(path.string() + ": header must list x0.. and u0.. columns");
    }
    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::stringstream ss(line);
        Index count = 0;
        for (std::string cell; std::getline(ss, cell, ','); ++count) {
            values.push_back(std::stod(cell));
        }
        if (count != n + m) {
            throw ConfigError(path.string() + ": row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                              " cells, expected " + std::to_string(n + m));
        }
        ++rows;
    }
    Trajectory traj;
    traj.states.resize(n, rows);
    traj.inputs.resize(m, rows);
    for (Index k = 0; k < rows; ++k) {
        for (Index i = 0; i < n; ++i) {
            traj.states(i, k) = values[static_cast<std::size_t>(k * (n + m) + i)];
        }
        for (Index i = 0; i < m; ++i) {
            traj.inputs(i, k) = values[static_cast<std::size_t>(k * (n + m) + n + i)];
        }
    }
    return traj;
}

fs::path write_instance(const fs::path& dir, const std::string& stem, const Instance& inst)
{
    const std::string csv_name = stem + ".csv";
    write_trajectory_csv(dir / csv_name, inst.data,
                         "data trajectory seed=" + std::to_string(inst.spec.seed) + " n=" + std::to_string(inst.spec.n) +
                             " m=" + std::to_string(inst.spec.m) + " N=" + std::to_string(inst.length));
    json j;
    j["trajectory"] = csv_name;
    j["n"] = inst.spec.n;
    j["m"] = inst.spec.m;
    j["L"] = inst.spec.horizon;
    j["N"] = inst.length;
    j["min_data_length"] = min_data_length(inst.spec.n, inst.spec.m, inst.spec.horizon);
    j["reconstructed"] = {{"N", inst.length_reconstructed}};
    j["seed"] = inst.spec.seed;
    j["plant_seed"] = inst.plant_seed;
    j["spectral_radius"] = inst.spec.spectral_radius;
    j["density"] = inst.spec.density;
    j["tracking"] = inst.spec.tracking;
    j["A"] = matrix_json(inst.system.a);
    j["B"] = matrix_json(inst.system.b);
    j["Q"] = matrix_json(inst.q_weight);
    j["R"] = matrix_json(inst.r_weight);
    j["x0"] = vector_json(inst.x0);
    if (inst.setpoint) {
        j["setpoint"] = {{"x_s", vector_json(inst.setpoint->x_s)}, {"u_s", vector_json(inst.setpoint->u_s)}};
    } else {
        j["setpoint"] = nullptr;
    }
    const fs::path json_path = dir / (stem + ".json");
    write_json(json_path, j);
    return json_path;
}

Instance read_instance(const fs::path& json_path)
{
    const json j = read_json(json_path);
    try {
        Instance inst;
        inst.spec.n = j.at("n").get<Index>();
        inst.spec.m = j.at("m").get<Index>();
        inst.spec.horizon = j.at("L").get<Index>();
        inst.length = j.at("N").get<Index>();
        inst.spec.length = inst.length;
        inst.spec.seed = j.at("seed").get<std::uint64_t>();
        inst.spec.tracking = j.value("tracking", false);
        inst.spec.spectral_radius = j.value("spectral_radius", 0.9);
        inst.spec.density = j.value("density", 0.5);
        inst.spec.validate();
        inst.length_reconstructed = j.contains("reconstructed") && j["reconstructed"].value("N", false);
        inst.plant_seed = j.value("plant_seed", std::uint64_t{0});
        const Index n = inst.spec.n;
        const Index m = inst.spec.m;
        inst.system.a = json_matrix(j.at("A"), n, n, "A");
        inst.system.b = json_matrix(j.at("B"), n, m, "B");
        inst.q_weight = json_matrix(j.at("Q"), n, n, "Q");
        inst.r_weight = json_matrix(j.at("R"), m, m, "R");
        inst.x0 = json_vector(j.at("x0"), n, "x0");
        if (j.contains("setpoint") && !j["setpoint"].is_null()) {
            inst.setpoint = Setpoint{json_vector(j["setpoint"].at("x_s"), n, "x_s"),
                                     json_vector(j["setpoint"].at("u_s"), m, "u_s")};
        }
        inst.data = read_trajectory_csv(json_path.parent_path() / j.at("trajectory").get<std::string>());
        if (inst.data.state_dim() != n || inst.data.input_dim() != m || inst.data.length() != inst.length) {
            throw ConfigError("instance: trajectory file does not match n, m, N");
        }
        return inst;
    } catch (const json::exception& e) {
        throw ConfigError(json_path.string() + ": " + e.what());
    }
}

void write_report_csv(const fs::path& path, const SolveReport& report)
{
    std::ofstream out = open_out(path);
    out << "outer_k,inner_j,residual_norm,grad_norm,alpha,elapsed_s\n";
    for (const IterationRecord& r : report.records) {
        out << r.outer << ',' << r.inner << ',' << format_double(r.residual_norm) << ','
            << format_double(r.grad_norm) << ',' << format_double(r.alpha) << ',' << format_double(r.elapsed_s)
            << '\n';
    }
}

json report_summary(const SolveReport& report)
{
    json j;
    j["method"] = report.method;
    j["status"] = to_string(report.status);
    j["outer_iterations"] = report.outer_iterations;
    j["inner_iterations"] = report.inner_iterations;
    j["matvecs"] = report.matvecs;
    j["elapsed_s"] = report.elapsed_s;
    j["mean_seconds_per_iteration"] = report.mean_seconds_per_iteration();
    j["final_residual"] = report.final_residual;
    json cfg = json::object();
    for (const auto& [key, value] : report.config) {
        cfg[key] = value;
    }
    j["config"] = cfg;
    j["z_norm"] = report.z.norm();
    j["lambda"] = vector_json(report.lambda);
    return j;
}

void write_residual_csv(const fs::path& path, const std::vector<ResidualRow>& rows)
{
    std::ofstream out = open_out(path);
    out << "method,iteration,residual_norm\n";
    for (const ResidualRow& r : rows) {
        out << r.method << ',' << r.iteration << ',' << format_double(r.residual_norm) << '\n';
    }
}

void write_bench_csv(const fs::path& path, const std::vector<ScalingSeries>& series)
{
    std::ofstream out = open_out(path);
    out << "n,m,L,N,total_iterations,total_seconds,mean_seconds_per_iteration,operator_bytes,dense_s_bytes,kappa_s,"
           "kappa_bs\n";
    for (const ScalingSeries& s : series) {
        for (const BenchRecord& r : s.records) {
            out << r.n << ',' << r.m << ',' << r.horizon << ',' << r.length << ',' << r.total_iterations << ','
                << format_double(r.total_seconds) << ',' << format_double(r.mean_seconds) << ',' << r.operator_bytes
                << ',' << r.dense_bytes << ',' << optional_cell(r.kappa_s) << ',' << optional_cell(r.kappa_bs)
                << '\n';
        }
    }
}

void write_condition_csv(const fs::path& path, const std::vector<ConditionPoint>& points)
{
    std::ofstream out = open_out(path);
    out << "n,m,L,N,rank,bfgs_iterations,kappa_s,kappa_bs\n";
    for (const ConditionPoint& p : points) {
        out << p.n << ',' << p.m << ',' << p.horizon << ',' << p.length << ',' << p.rank << ',' << p.bfgs_iterations
            << ',' << format_double(p.kappa_s) << ',' << format_double(p.kappa_bs) << '\n';
    }
}

void write_closed_loop_csv(const fs::path& path, const ClosedLoopResult& result)
{
    std::ofstream out = open_out(path);
    const Index n = result.x_s.size();
    const Index m = result.u_s.size();
    out << "step,error,iterations,status";
    for (Index i = 0; i < n; ++i) {
        out << ",x" << i;
    }
    for (Index i = 0; i < m; ++i) {
        out << ",u" << i;
    }
    out << '\n';
    for (const ClosedLoopStep& s : result.steps) {
        out << s.step << ',' << format_double(s.error) << ',' << s.iterations << ',' << to_string(s.status);
        for (Index i = 0; i < n; ++i) {
            out << ',' << format_double(s.x(i));
        }
        for (Index i = 0; i < m; ++i) {
            out << ',' << format_double(s.u(i));
        }
        out << '\n';
    }
}

void write_json(const fs::path& path, const json& value)
{
    std::ofstream out = open_out(path);
    out << value.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace mfdeepc
