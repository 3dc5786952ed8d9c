#ifndef QUANTREP_SERIALIZE_HPP
#define QUANTREP_SERIALIZE_HPP

#include "core.hpp"
#include "linear.hpp"
#include "quantile_model.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace quantrep {

inline constexpr const char* kModelSchema = "quantrep.model/1";

// Model files: <stem>.json holds the grid, base and anchor classifiers; the
// dense coefficients go to <stem>.bin as little-endian float64, class-major,
// each class a (n_dense x (d + 1)) row-major block.

inline nlohmann::json model_to_json(const QuantileModel& m, const std::string& dense_file) {
    nlohmann::json j;
    j["schema"] = kModelSchema;
    j["num_classes"] = m.num_classes;
    j["dim"] = m.dim;
    j["grid"] = {{"anchors", m.grid.anchors}, {"dense", m.grid.dense}};
    j["dense_file"] = dense_file;
    j["classes"] = nlohmann::json::array();
    for (const auto& c : m.classes) {
        nlohmann::json jc;
        jc["base"] = c.base ? nlohmann::json(*c.base) : nlohmann::json(nullptr);
        jc["anchors"] = c.anchors;
        std::vector<int> deg(c.degenerate.begin(), c.degenerate.end());
        jc["degenerate"] = deg;
        j["classes"].push_back(jc);
    }
    return j;
}

namespace detail {

inline void write_f64_le(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline double read_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

/// Writes `<path>` (JSON) and its dense-coefficient sidecar next to it.
inline void save_model(const QuantileModel& m, const std::filesystem::path& path) {
    auto bin = path;
    bin.replace_extension(".bin");
    {
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << model_to_json(m, bin.filename().string()).dump(1) << '\n';
    }
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + bin.string());
    for (const auto& c : m.classes) {
        for (double v : c.dense.data()) detail::write_f64_le(out, v);
    }
}

inline QuantileModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("model " + path.string() + ": " + e.what());
    }
    QuantileModel m;
    try {
        if (j.at("schema").get<std::string>() != kModelSchema) {
            throw ValidationError("unsupported model schema " + j.at("schema").dump());
        }
        m.num_classes = j.at("num_classes").get<int>();
        m.dim = j.at("dim").get<std::size_t>();
        m.grid.anchors = j.at("grid").at("anchors").get<std::vector<double>>();
        m.grid.dense = j.at("grid").at("dense").get<std::vector<double>>();
        for (const auto& jc : j.at("classes")) {
            ClassQuantiles c;
            if (!jc.at("base").is_null()) c.base = jc.at("base").get<LinearClassifier>();
            c.anchors = jc.at("anchors").get<std::vector<LinearClassifier>>();
            for (int d : jc.at("degenerate").get<std::vector<int>>()) c.degenerate.push_back(d != 0);
            m.classes.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("model " + path.string() + ": " + e.what());
    }
    m.grid.validate();
    if (m.classes.size() != static_cast<std::size_t>(m.num_classes)) {
        throw ValidationError("model class count does not match its class blocks");
    }

    const auto bin = path.parent_path() / j.at("dense_file").get<std::string>();
    std::ifstream bin_in(bin, std::ios::binary);
    if (!bin_in) throw ValidationError("cannot open dense coefficients " + bin.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin_in)), std::istreambuf_iterator<char>());
    const std::size_t block = m.grid.dense.size() * (m.dim + 1);
    if (bytes.size() != 8 * block * m.classes.size()) {
        throw ValidationError("dense coefficient file has the wrong size");
    }
    for (std::size_t c = 0; c < m.classes.size(); ++c) {
        std::vector<double> vals(block);
        for (std::size_t i = 0; i < block; ++i) vals[i] = detail::read_f64_le(&bytes[8 * (c * block + i)]);
        m.classes[c].dense = Matrix(m.grid.dense.size(), m.dim + 1, std::move(vals));
        if (m.classes[c].anchors.size() != m.grid.anchors.size() ||
            m.classes[c].degenerate.size() != m.grid.anchors.size()) {
            throw ValidationError("model anchor count does not match the grid");
        }
    }
    return m;
}

}  // namespace quantrep

#endif
