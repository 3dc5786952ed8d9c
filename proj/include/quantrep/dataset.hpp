#ifndef QUANTREP_DATASET_HPP
#define QUANTREP_DATASET_HPP

#include "core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace quantrep {

struct Dataset {
    Matrix features;
    std::vector<int> labels;
    int num_classes = 2;
    std::optional<std::vector<double>> weights;
    std::optional<std::vector<double>> posterior;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    /// Throws ValidationError if any invariant is broken.
    void validate() const {
        if (num_classes < 2) {
            throw ValidationError("dataset needs at least two classes");
        }
        if (features.rows() != labels.size()) {
            throw ValidationError("feature rows (" + std::to_string(features.rows()) +
                                  ") do not match label count (" + std::to_string(labels.size()) + ")");
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0 || labels[i] >= num_classes) {
                throw ValidationError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                      " outside [0, " + std::to_string(num_classes) + ")");
            }
        }
        if (weights) {
            if (weights->size() != labels.size()) {
                throw ValidationError("weight count does not match label count");
            }
            for (double w : *weights) {
                if (!(w > 0.0) || !std::isfinite(w)) {
                    throw ValidationError("weights must be strictly positive");
                }
            }
        }
        if (posterior) {
            if (posterior->size() != labels.size()) {
                throw ValidationError("posterior count does not match label count");
            }
            for (double p : *posterior) {
                if (!(p > 0.0 && p < 1.0)) {
                    throw ValidationError("posterior values must lie in (0, 1)");
                }
            }
        }
        if (!all_finite(features.data())) {
            throw ValidationError("non-finite feature value");
        }
    }

    bool operator==(const Dataset&) const = default;
};

enum class DataFormat { csv, jsonl };

inline DataFormat format_from_path(const std::string& path) {
    if (path.size() >= 6 && path.ends_with(".jsonl")) {
        return DataFormat::jsonl;
    }
    return DataFormat::csv;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& s : out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
    // std::from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("cannot parse number '" + std::string(s) + "'", line);
    }
    return v;
}

inline int parse_int(std::string_view s, std::size_t line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("cannot parse label '" + std::string(s) + "'", line);
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline int infer_classes(const std::vector<int>& labels) {
    int k = 2;
    for (int y : labels) {
        k = std::max(k, y + 1);
    }
    return k;
}

}  // namespace detail

/// CSV layout: optional `# classes=K` line, then a header
/// `f0,...,f{d-1},label[,weight][,posterior]`, then one row per sample.
inline Dataset read_csv(std::istream& in) {
    Dataset ds;
    std::optional<int> declared_k;
    std::string line;
    std::size_t lineno = 0;
    std::size_t d = 0;
    bool have_weight = false;
    bool have_posterior = false;
    bool header_seen = false;
    std::vector<double> weights;
    std::vector<double> posterior;

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            auto pos = sv.find("classes=");
            if (pos != std::string_view::npos) {
                declared_k = detail::parse_int(sv.substr(pos + 8), lineno);
            }
            continue;
        }
        auto cells = detail::split_commas(sv);
        if (!header_seen) {
            header_seen = true;
            std::size_t i = 0;
            while (i < cells.size() && cells[i] == "f" + std::to_string(i)) ++i;
            d = i;
            if (i >= cells.size() || cells[i] != "label") {
                throw ParseError("header must be f0,...,f{d-1},label[,weight][,posterior]", lineno);
            }
            ++i;
            if (i < cells.size() && cells[i] == "weight") {
                have_weight = true;
                ++i;
            }
            if (i < cells.size() && cells[i] == "posterior") {
                have_posterior = true;
                ++i;
            }
            if (i != cells.size()) {
                throw ParseError("unexpected column '" + std::string(cells[i]) + "'", lineno);
            }
            if (d == 0) {
                throw ParseError("no feature columns", lineno);
            }
            ds.features = Matrix(0, d);
            continue;
        }
        const std::size_t expected = d + 1 + (have_weight ? 1 : 0) + (have_posterior ? 1 : 0);
        if (cells.size() != expected) {
            throw ParseError("expected " + std::to_string(expected) + " fields, got " + std::to_string(cells.size()),
                             lineno);
        }
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = detail::parse_double(cells[j], lineno);
        }
        ds.features.append_row(row);
        const int y = detail::parse_int(cells[d], lineno);
        if (y < 0 || (declared_k && y >= *declared_k)) {
            throw ValidationError("line " + std::to_string(lineno) + ": label " + std::to_string(y) +
                                  " out of range for " + std::to_string(declared_k.value_or(0)) + " classes");
        }
        ds.labels.push_back(y);
        std::size_t c = d + 1;
        if (have_weight) weights.push_back(detail::parse_double(cells[c++], lineno));
        if (have_posterior) posterior.push_back(detail::parse_double(cells[c++], lineno));
    }
    if (!header_seen) {
        throw ParseError("empty file", lineno);
    }
    ds.num_classes = declared_k.value_or(detail::infer_classes(ds.labels));
    if (have_weight) ds.weights = std::move(weights);
    if (have_posterior) ds.posterior = std::move(posterior);
    ds.validate();
    return ds;
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
    ds.validate();
    out << "# classes=" << ds.num_classes << '\n';
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        out << 'f' << j << ',';
    }
    out << "label";
    if (ds.weights) out << ",weight";
    if (ds.posterior) out << ",posterior";
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features.row(i)) {
            out << detail::format_double(v) << ',';
        }
        out << ds.labels[i];
        if (ds.weights) out << ',' << detail::format_double((*ds.weights)[i]);
        if (ds.posterior) out << ',' << detail::format_double((*ds.posterior)[i]);
        out << '\n';
    }
}

/// JSONL: one object per row with `features`, `label`, optional `weight` and
/// `posterior`. An optional first object `{"classes": K}` declares k.
inline Dataset read_jsonl(std::istream& in) {
    Dataset ds;
    std::optional<int> declared_k;
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> weights;
    std::vector<double> posterior;
    bool any_weight = false;
    bool any_posterior = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.what(), lineno);
        }
        if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);
        if (obj.contains("classes") && !obj.contains("features")) {
            declared_k = obj["classes"].get<int>();
            continue;
        }
        if (!obj.contains("features") || !obj["features"].is_array() || !obj.contains("label") ||
            !obj["label"].is_number_integer()) {
            throw ParseError("row needs array 'features' and integer 'label'", lineno);
        }
        std::vector<double> row;
        for (const auto& v : obj["features"]) {
            if (!v.is_number()) throw ParseError("non-numeric feature", lineno);
            row.push_back(v.get<double>());
        }
        if (ds.features.rows() > 0 && row.size() != ds.features.cols()) {
            throw ParseError("feature width mismatch", lineno);
        }
        ds.features.append_row(row);
        const int y = obj["label"].get<int>();
        if (y < 0 || (declared_k && y >= *declared_k)) {
            throw ValidationError("line " + std::to_string(lineno) + ": label " + std::to_string(y) + " out of range");
        }
        ds.labels.push_back(y);
        if (obj.contains("weight")) {
            any_weight = true;
            weights.push_back(obj["weight"].get<double>());
        }
        if (obj.contains("posterior")) {
            any_posterior = true;
            posterior.push_back(obj["posterior"].get<double>());
        }
    }
    if (any_weight) {
        if (weights.size() != ds.size()) throw ValidationError("'weight' must be present on every row or none");
        ds.weights = std::move(weights);
    }
    if (any_posterior) {
        if (posterior.size() != ds.size()) throw ValidationError("'posterior' must be present on every row or none");
        ds.posterior = std::move(posterior);
    }
    ds.num_classes = declared_k.value_or(detail::infer_classes(ds.labels));
    ds.validate();
    return ds;
}

inline void write_jsonl(std::ostream& out, const Dataset& ds) {
    ds.validate();
    out << nlohmann::json{{"classes", ds.num_classes}}.dump() << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        nlohmann::json obj;
        auto r = ds.features.row(i);
        obj["features"] = std::vector<double>(r.begin(), r.end());
        obj["label"] = ds.labels[i];
        if (ds.weights) obj["weight"] = (*ds.weights)[i];
        if (ds.posterior) obj["posterior"] = (*ds.posterior)[i];
        out << obj.dump() << '\n';
    }
}

inline Dataset load_dataset(const std::string& path, std::optional<DataFormat> format = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path);
    }
    return format.value_or(format_from_path(path)) == DataFormat::jsonl ? read_jsonl(in) : read_csv(in);
}

inline void save_dataset(const Dataset& ds, const std::string& path, std::optional<DataFormat> format = std::nullopt) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write " + path);
    }
    if (format.value_or(format_from_path(path)) == DataFormat::jsonl) {
        write_jsonl(out, ds);
    } else {
        write_csv(out, ds);
    }
}

/// Rows n x k with a single 1 per row at the label column.
inline Matrix one_hot(const std::vector<int>& labels, int k) {
    if (k < 1) throw ValidationError("one_hot needs k >= 1");
    Matrix out(labels.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k) {
            throw ValidationError("label " + std::to_string(labels[i]) + " out of range for one_hot");
        }
        out(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generators. All are pure functions of their arguments and the seed.

struct TwoMoonsConfig {
    std::size_t n_per_class = 200;
    double noise = 0.1;
    std::size_t ood_n = 100;
    std::array<double, 2> ood_center{8.0, 1.5};
    std::uint64_t seed = 0;
};

struct TwoMoons {
    Dataset id;
    Dataset ood;
};

/// Two interleaved unit half-circles (labels 0 and 1) and a separate Gaussian
/// cluster used as out-of-distribution data. The OOD set carries label 0 as a
/// placeholder.
inline TwoMoons gen_two_moons(const TwoMoonsConfig& cfg) {
    if (cfg.n_per_class < 2) throw ValidationError("two-moons needs n_per_class >= 2");
    if (!(cfg.noise >= 0.0)) throw ValidationError("two-moons noise must be >= 0");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TwoMoons out;
    out.id.features = Matrix(0, 2);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
            const double t = angle(rng);
            double x = c == 0 ? std::cos(t) : 1.0 - std::cos(t);
            double y = c == 0 ? std::sin(t) : 0.5 - std::sin(t);
            if (cfg.noise > 0.0) {
                x += cfg.noise * gauss(rng);
                y += cfg.noise * gauss(rng);
            }
            const std::array<double, 2> row{x, y};
            out.id.features.append_row(row);
            out.id.labels.push_back(c);
        }
    }
    out.id.num_classes = 2;

    out.ood.features = Matrix(0, 2);
    for (std::size_t i = 0; i < cfg.ood_n; ++i) {
        std::array<double, 2> row = cfg.ood_center;
        if (cfg.noise > 0.0) {
            row[0] += cfg.noise * gauss(rng);
            row[1] += cfg.noise * gauss(rng);
        }
        out.ood.features.append_row(row);
        out.ood.labels.push_back(0);
    }
    out.ood.num_classes = 2;
    return out;
}

/// Axis-aligned Gaussian cluster per row of `centers`, stds given per axis.
inline Dataset gen_gaussian_pair(const std::array<std::array<double, 2>, 2>& centers,
                                 const std::array<std::array<double, 2>, 2>& stds, std::size_t n_per_class,
                                 std::uint64_t seed) {
    for (const auto& s : stds) {
        for (double v : s) {
            if (!(v > 0.0)) throw ValidationError("gaussian-pair stds must be strictly positive");
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Dataset ds;
    ds.features = Matrix(0, 2);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            std::array<double, 2> row{};
            for (int j = 0; j < 2; ++j) {
                row[j] = centers[c][j] + stds[c][j] * gauss(rng);
            }
            ds.features.append_row(row);
            ds.labels.push_back(c);
        }
    }
    ds.num_classes = 2;
    return ds;
}

inline constexpr std::array<std::array<double, 2>, 2> kShiftCenters{{{0.0, 0.0}, {1.0, 1.0}}};
inline constexpr std::array<std::array<double, 2>, 2> kShiftStds{{{0.1, 0.3}, {0.3, 0.11}}};

enum class NoiseKind { homoskedastic_gaussian, heteroskedastic_gaussian };

inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "homoskedastic-gaussian") return NoiseKind::homoskedastic_gaussian;
    if (s == "heteroskedastic-gaussian") return NoiseKind::heteroskedastic_gaussian;
    throw ConfigError("unsupported noise kind '" + s + "'");
}

inline std::string to_string(NoiseKind k) {
    return k == NoiseKind::homoskedastic_gaussian ? "homoskedastic-gaussian" : "heteroskedastic-gaussian";
}

/// z = g(x) + eps(x), y = I[z >= 0], with linear g and Gaussian eps whose
/// scale is `noise_scale` (homoskedastic) or `noise_scale + noise_slope*|x|`.
struct LatentModelSpec {
    std::vector<double> g_coefficients;
    double g_intercept = 0.0;
    NoiseKind noise_kind = NoiseKind::homoskedastic_gaussian;
    double noise_scale = 1.0;
    double noise_slope = 0.0;

    void validate() const {
        if (!(noise_scale > 0.0)) throw ValidationError("noise_scale must be > 0");
        if (noise_kind == NoiseKind::heteroskedastic_gaussian && noise_slope < 0.0) {
            throw ValidationError("noise_slope must be >= 0");
        }
        if (g_coefficients.empty()) throw ValidationError("g needs at least one coefficient");
    }

    double latent(std::span<const double> x) const { return dot(g_coefficients, x) + g_intercept; }

    double scale(std::span<const double> x) const {
        if (noise_kind == NoiseKind::homoskedastic_gaussian) return noise_scale;
        return noise_scale + noise_slope * norm2(x);
    }

    /// P(g(x) + eps(x) >= 0), clamped into the open unit interval.
    double posterior(std::span<const double> x) const {
        const double p = normal_cdf(latent(x) / scale(x));
        return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    }
};

inline void to_json(nlohmann::json& j, const LatentModelSpec& s) {
    j = {{"kind", "latent-oracle"},
         {"g_coefficients", s.g_coefficients},
         {"g_intercept", s.g_intercept},
         {"noise_kind", to_string(s.noise_kind)},
         {"noise_scale", s.noise_scale},
         {"noise_slope", s.noise_slope}};
}

inline void from_json(const nlohmann::json& j, LatentModelSpec& s) {
    s.g_coefficients = j.at("g_coefficients").get<std::vector<double>>();
    s.g_intercept = j.value("g_intercept", 0.0);
    s.noise_kind = parse_noise_kind(j.value("noise_kind", std::string("homoskedastic-gaussian")));
    s.noise_scale = j.value("noise_scale", 1.0);
    s.noise_slope = j.value("noise_slope", 0.0);
}

struct FeatureSampler {
    double low = -3.0;
    double high = 3.0;
};

inline std::vector<double> latent_posterior(const LatentModelSpec& spec, const Matrix& features) {
    std::vector<double> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out[i] = spec.posterior(features.row(i));
    }
    return out;
}

inline Dataset gen_latent_binary(const LatentModelSpec& spec, std::size_t n, const FeatureSampler& sampler,
                                 std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw ValidationError("latent-binary needs n >= 1");
    if (!(sampler.high > sampler.low)) throw ValidationError("feature sampler needs high > low");
    const std::size_t d = spec.g_coefficients.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(sampler.low, sampler.high);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    std::vector<double> post(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = ds.features.row(i);
        for (auto& v : x) v = unif(rng);
        const double z = spec.latent(x) + spec.scale(x) * gauss(rng);
        ds.labels[i] = z >= 0.0 ? 1 : 0;
        post[i] = spec.posterior(x);
    }
    ds.posterior = std::move(post);
    ds.num_classes = 2;
    return ds;
}

}  // namespace quantrep

#endif
