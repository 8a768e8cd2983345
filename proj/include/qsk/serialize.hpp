#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "qsk/errors.hpp"
#include "qsk/estimate.hpp"
#include "qsk/model_core.hpp"
#include "qsk/parisi_functional.hpp"
#include "qsk/path_measure.hpp"
#include "qsk/variational_solver.hpp"

namespace qsk {

using ordered_json = nlohmann::ordered_json;

// JSON has no NaN/Inf literals; failed entries become null.
inline ordered_json json_number(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

inline ordered_json json_of(const Estimate& e) {
    ordered_json j;
    j["value"] = json_number(e.value);
    j["stderr"] = json_number(e.stderr_);
    j["n_samples"] = e.n_samples;
    j["acceptance_rate"] = json_number(e.acceptance_rate);
    j["ess"] = json_number(e.ess);
    j["status"] = to_string(e.status);
    return j;
}

inline Estimate estimate_from_json(const ordered_json& j) {
    Estimate e;
    e.value = j.at("value").get<double>();
    e.stderr_ = j.at("stderr").get<double>();
    e.n_samples = j.at("n_samples").get<long>();
    e.acceptance_rate = j.at("acceptance_rate").get<double>();
    e.ess = j.at("ess").get<double>();
    e.status = estimate_status_from_string(j.at("status").get<std::string>());
    return e;
}

inline ordered_json json_of(const FlipPath& p) {
    ordered_json j;
    j["initial_sign"] = p.initial_sign;
    j["flip_times"] = p.flip_times;
    return j;
}

inline FlipPath flip_path_from_json(const ordered_json& j) {
    FlipPath p;
    p.initial_sign = j.at("initial_sign").get<int>();
    p.flip_times = j.at("flip_times").get<std::vector<double>>();
    validate_path(p);
    return p;
}

// Matrices as row arrays; square shape is re-checked on the way in.
inline ordered_json json_of(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(json_number(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("matrix payload must be a nonempty array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ValidationError("matrix payload rows have uneven lengths");
        for (Eigen::Index k = 0; k < cols; ++k)
            m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

inline ordered_json json_of(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
    return a;
}

inline ordered_json json_of(const DiscretePiPath& p) {
    ordered_json j;
    j["d"] = p.d;
    j["weights"] = p.weights;
    ordered_json levels = ordered_json::array();
    for (const auto& g : p.levels) levels.push_back(json_of(g));
    j["levels"] = std::move(levels);
    return j;
}

inline DiscretePiPath pi_path_from_json(const ordered_json& j) {
    DiscretePiPath p;
    p.d = j.at("d").get<int>();
    p.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& g : j.at("levels")) p.levels.push_back(matrix_from_json(g));
    validate_pi_path(p);
    return p;
}

inline ordered_json json_of(const QuenchedResult& q) {
    ordered_json j;
    j["value"] = json_number(q.mean_value);
    j["stderr"] = json_number(q.stderr_);
    j["n_requested"] = q.n_requested;
    j["n_succeeded"] = q.n_succeeded;
    ordered_json values = ordered_json::array();
    for (double v : q.values) values.push_back(json_number(v));
    j["values"] = std::move(values);
    j["failed_draws"] = q.failed_draws;
    j["failure_messages"] = q.failure_messages;
    return j;
}

inline ordered_json json_of(const VariationalResult& r) {
    ordered_json j;
    j["value"] = json_number(r.value);
    j["stderr"] = json_number(r.stderr_);
    j["rho"] = json_of(r.rho_star);
    j["path"] = json_of(r.path_star);
    j["lambda"] = json_of(r.lambda_star);
    j["hull_weights"] = json_of(r.weights);
    j["dictionary"] = json_of(r.dictionary);
    j["inner_converged"] = r.inner_converged;
    j["outer_converged"] = r.outer_converged;
    j["lambda_on_boundary"] = r.lambda_on_boundary;
    return j;
}

// Raw little-endian doubles, n*n of them; the only non-text artifact.
inline void save_disorder(const std::filesystem::path& file, const DisorderMatrix& g) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open disorder file for writing: " + file.string());
    for (double v : g.values()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
        out.write(b, 8);
    }
    if (!out) throw ValidationError("failed writing disorder file: " + file.string());
}

inline DisorderMatrix load_disorder(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open disorder file: " + file.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty() || bytes.size() % 8 != 0)
        throw ValidationError("disorder file size is not a multiple of 8 bytes");
    const std::size_t count = bytes.size() / 8;
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(count))));
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != count)
        throw ValidationError("disorder file does not hold a square matrix");
    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * k + i]))
                    << (8 * i);
        values[k] = std::bit_cast<double>(bits);
    }
    return DisorderMatrix::from_values(n, std::move(values));
}

// Round-trip-exact decimal form for CSV cells.
inline std::string csv_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out += ',';
            out += header[i];
        }
        out += '\n';
        for (const auto& row : rows) {
            if (row.size() != header.size())
                throw ValidationError("csv row width does not match header");
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += row[i];
            }
            out += '\n';
        }
        return out;
    }
};

inline void write_text_file(const std::filesystem::path& file, const std::string& content) {
    if (file.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + file.string());
    out << content;
    if (!out) throw ValidationError("failed writing file: " + file.string());
}

inline std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + file.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace qsk
