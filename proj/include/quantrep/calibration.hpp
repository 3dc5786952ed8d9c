#ifndef QUANTREP_CALIBRATION_HPP
#define QUANTREP_CALIBRATION_HPP

#include "core.hpp"
#include "dataset.hpp"
#include "isotonic.hpp"
#include "linear.hpp"
#include "quantile_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace quantrep {

enum class Binning { equal_width, quantile };

inline Binning parse_binning(const std::string& s) {
    if (s == "equal-width") return Binning::equal_width;
    if (s == "quantile") return Binning::quantile;
    throw ConfigError("unknown binning '" + s + "'");
}

/// Bin j covers [edges[j], edges[j+1]); the last bin is closed on the right.
struct ReliabilityTable {
    std::vector<double> edges;
    std::vector<std::size_t> count;
    std::vector<double> mean_confidence;
    std::vector<double> accuracy;
};

struct EceResult {
    double ece = 0.0;
    ReliabilityTable table;
};

/// Binned calibration error sum_B |B|/n * |acc(B) - conf(B)| where conf(B) is
/// the mean confidence in B. `correct` holds the 0/1 outcome per sample.
inline EceResult ece(std::span<const double> confidences, std::span<const int> correct, std::size_t m,
                     Binning binning = Binning::quantile) {
    if (confidences.size() != correct.size()) throw ValidationError("confidences and outcomes differ in length");
    if (m < 1) throw ValidationError("need at least one bin");
    for (double c : confidences) {
        if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("confidences must lie in [0, 1]");
    }
    const std::size_t n = confidences.size();
    EceResult r;
    auto& t = r.table;
    t.edges.assign(m + 1, 0.0);
    if (binning == Binning::equal_width || n == 0) {
        for (std::size_t j = 0; j <= m; ++j) t.edges[j] = static_cast<double>(j) / static_cast<double>(m);
    } else {
        std::vector<double> sorted(confidences.begin(), confidences.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 1; j < m; ++j) t.edges[j] = sorted[j * n / m];
        t.edges[m] = 1.0;
    }
    auto bin_of = [&](double c) -> std::size_t {
        if (binning == Binning::equal_width) {
            return std::min(static_cast<std::size_t>(c * static_cast<double>(m)), m - 1);
        }
        // Number of interior edges <= c; tied confidences share a bin.
        return static_cast<std::size_t>(std::upper_bound(t.edges.begin() + 1, t.edges.end() - 1, c) -
                                        (t.edges.begin() + 1));
    };
    t.count.assign(m, 0);
    std::vector<double> conf_sum(m, 0.0);
    std::vector<double> hit_sum(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = bin_of(confidences[i]);
        ++t.count[b];
        conf_sum[b] += confidences[i];
        hit_sum[b] += correct[i] ? 1.0 : 0.0;
    }
    t.mean_confidence.assign(m, 0.0);
    t.accuracy.assign(m, 0.0);
    for (std::size_t b = 0; b < m; ++b) {
        if (t.count[b] == 0) continue;
        const double cnt = static_cast<double>(t.count[b]);
        t.mean_confidence[b] = conf_sum[b] / cnt;
        t.accuracy[b] = hit_sum[b] / cnt;
        r.ece += cnt / static_cast<double>(n) * std::abs(t.accuracy[b] - t.mean_confidence[b]);
    }
    return r;
}

struct MspResult {
    std::vector<double> confidence;
    std::vector<int> predicted;
};

/// Row-wise max and argmax (ties go to the lowest class index).
inline MspResult msp_confidence(const Matrix& probs) {
    if (probs.cols() < 2) throw ValidationError("msp needs at least two classes");
    MspResult r;
    r.confidence.resize(probs.rows());
    r.predicted.resize(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        auto row = probs.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        r.confidence[i] = row[best];
        r.predicted[i] = static_cast<int>(best);
    }
    return r;
}

inline std::vector<int> correctness(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (predicted.size() != labels.size()) throw ValidationError("prediction and label counts differ");
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = predicted[i] == labels[i] ? 1 : 0;
    return out;
}

inline double accuracy(std::span<const int> correct) {
    if (correct.empty()) return 0.0;
    return static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) /
           static_cast<double>(correct.size());
}

// ---------------------------------------------------------------------------
// Post-hoc corrections.

enum class ScoreKind { probability, logit };

struct PlattScaling {
    double a = 1.0;
    double b = 0.0;
    ScoreKind kind = ScoreKind::probability;
};

namespace detail {

inline double platt_feature(double s, ScoreKind kind) {
    if (kind == ScoreKind::logit) return s;
    const double p = std::clamp(s, 1e-6, 1.0 - 1e-6);
    return std::log(p / (1.0 - p));
}

inline void check_both_outcomes(std::span<const int> correct) {
    const bool has0 = std::find(correct.begin(), correct.end(), 0) != correct.end();
    const bool has1 = std::find(correct.begin(), correct.end(), 1) != correct.end();
    if (!has0 || !has1) throw ValidationError("calibration map needs both outcomes in the fitting data");
}

}  // namespace detail

/// Fits sigma(a * s + b) by log loss. Probability scores are mapped to logits
/// first so that a = 1, b = 0 is the identity.
inline PlattScaling platt_fit(std::span<const double> scores, std::span<const int> correct,
                              ScoreKind kind = ScoreKind::probability) {
    if (scores.size() != correct.size()) throw ValidationError("scores and outcomes differ in length");
    detail::check_both_outcomes(correct);
    Matrix x(scores.size(), 1);
    for (std::size_t i = 0; i < scores.size(); ++i) x(i, 0) = detail::platt_feature(scores[i], kind);
    std::vector<int> y(correct.begin(), correct.end());
    FitConfig cfg;
    cfg.l2_reg = 1e-9;
    cfg.max_iter = 200;
    auto fit = fit_logistic(x, y, cfg);
    return {fit.classifier.weights[0], fit.classifier.bias, kind};
}

inline std::vector<double> platt_apply(std::span<const double> scores, const PlattScaling& p) {
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = sigmoid(p.a * detail::platt_feature(scores[i], p.kind) + p.b);
    }
    return out;
}

/// Nondecreasing step map: knots are the distinct fitted scores; a query takes
/// the value of the last knot at or below it (the first knot below range).
struct IsotonicMap {
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double s) const {
        auto it = std::upper_bound(knots.begin(), knots.end(), s);
        if (it == knots.begin()) return values.front();
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }
};

/// A single-outcome input is accepted and yields the constant map.
inline IsotonicMap isotonic_fit(std::span<const double> scores, std::span<const int> correct) {
    if (scores.size() != correct.size()) throw ValidationError("scores and outcomes differ in length");
    if (scores.empty()) throw ValidationError("isotonic fit needs at least one sample");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    IsotonicMap map;
    std::vector<double> means;
    std::vector<double> weights;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double hits = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            hits += correct[order[j]];
            ++j;
        }
        map.knots.push_back(scores[order[i]]);
        means.push_back(hits / static_cast<double>(j - i));
        weights.push_back(static_cast<double>(j - i));
        i = j;
    }
    map.values = pool_adjacent_violators(means, weights);
    return map;
}

inline std::vector<double> isotonic_apply(std::span<const double> scores, const IsotonicMap& map) {
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = map(scores[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Corruption sweep.

enum class Corruption { gaussian_noise, feature_scaling, feature_shift };

inline Corruption parse_corruption(const std::string& s) {
    if (s == "gaussian-noise") return Corruption::gaussian_noise;
    if (s == "feature-scaling") return Corruption::feature_scaling;
    if (s == "feature-shift") return Corruption::feature_shift;
    throw ConfigError("unknown corruption '" + s + "'");
}

inline std::vector<double> feature_stds(const Matrix& x) {
    std::vector<double> out(x.cols(), 0.0);
    if (x.rows() < 2) return out;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
        mean /= static_cast<double>(x.rows());
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        out[j] = std::sqrt(ss / static_cast<double>(x.rows() - 1));
    }
    return out;
}

/// Severity s: additive N(0, (s*sigma_j)^2) noise, scaling by (1 + s), or a
/// constant shift of s*sigma_j. Severity 0 returns the input unchanged. The
/// sweep reuses one seed for every severity, so noise grows along fixed
/// directions.
inline Matrix corrupt(const Matrix& x, Corruption kind, double severity, std::span<const double> stds,
                      std::uint64_t seed) {
    if (severity == 0.0) return x;
    Matrix out = x;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            switch (kind) {
                case Corruption::gaussian_noise: out(i, j) += severity * stds[j] * gauss(rng); break;
                case Corruption::feature_scaling: out(i, j) *= 1.0 + severity; break;
                case Corruption::feature_shift: out(i, j) += severity * stds[j]; break;
            }
        }
    }
    return out;
}

/// Per-class probabilities from the base classifier on arbitrary features.
using BaseScorer = std::function<Matrix(const Matrix&)>;

/// Sigmoid for a binary problem; softmax over one-vs-rest logits otherwise.
inline BaseScorer linear_base_scorer(std::vector<LinearClassifier> bases) {
    return [bases = std::move(bases)](const Matrix& x) {
        Matrix p(x.rows(), bases.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (bases.size() == 2) {
                const double p1 = sigmoid(bases[1].decision(x.row(i)));
                p(i, 0) = 1.0 - p1;
                p(i, 1) = p1;
                continue;
            }
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < bases.size(); ++c) mx = std::max(mx, bases[c].decision(x.row(i)));
            double z = 0.0;
            for (std::size_t c = 0; c < bases.size(); ++c) {
                p(i, c) = std::exp(bases[c].decision(x.row(i)) - mx);
                z += p(i, c);
            }
            for (std::size_t c = 0; c < bases.size(); ++c) p(i, c) /= z;
        }
        return p;
    };
}

inline BaseScorer latent_oracle_scorer(LatentModelSpec spec) {
    return [spec = std::move(spec)](const Matrix& x) { return binary_probability_columns(latent_posterior(spec, x)); };
}

struct SweepConfig {
    Corruption corruption = Corruption::gaussian_noise;
    std::vector<double> severities{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    std::size_t bins = 5;
    Binning binning = Binning::quantile;
    std::uint64_t seed = 0;
};

struct SweepRow {
    double severity = 0.0;
    std::string method;
    double accuracy = 0.0;
    double ece = 0.0;
};

struct CalibrationReport {
    std::vector<SweepRow> rows;
    // ECE of the corrected maps on the validation data they were fit on.
    std::optional<double> validation_ece_before;
    std::optional<double> validation_ece_platt;
    std::optional<double> validation_ece_isotonic;

    const SweepRow& find(double severity, const std::string& method) const {
        for (const auto& r : rows) {
            if (r.severity == severity && r.method == method) return r;
        }
        throw ValidationError("no sweep row for " + method);
    }
};

/// Accuracy and ECE of QUANT (quantile-derived probabilities) and MSP (base
/// classifier) along a corruption severity ladder. When validation data is
/// given, Platt and isotonic maps are fit on clean validation QUANT
/// confidences and applied at every severity.
inline CalibrationReport corruption_sweep(const QuantileModel& model, const BaseScorer& base, const Dataset& clean,
                                          const SweepConfig& cfg, const Dataset* validation = nullptr) {
    for (std::size_t i = 1; i < cfg.severities.size(); ++i) {
        if (cfg.severities[i] < cfg.severities[i - 1]) throw ValidationError("severities must be sorted ascending");
    }
    const auto stds = feature_stds(clean.features);

    std::optional<PlattScaling> platt;
    std::optional<IsotonicMap> iso;
    CalibrationReport report;
    if (validation) {
        auto q = msp_confidence(quantile_probabilities(model, validation->features));
        auto ok = correctness(q.predicted, validation->labels);
        platt = platt_fit(q.confidence, ok);
        iso = isotonic_fit(q.confidence, ok);
        report.validation_ece_before = ece(q.confidence, ok, cfg.bins, cfg.binning).ece;
        report.validation_ece_platt = ece(platt_apply(q.confidence, *platt), ok, cfg.bins, cfg.binning).ece;
        report.validation_ece_isotonic = ece(isotonic_apply(q.confidence, *iso), ok, cfg.bins, cfg.binning).ece;
    }

    for (std::size_t s = 0; s < cfg.severities.size(); ++s) {
        const double sev = cfg.severities[s];
        const Matrix x = corrupt(clean.features, cfg.corruption, sev, stds, cfg.seed);
        auto q = msp_confidence(quantile_probabilities(model, x));
        auto q_ok = correctness(q.predicted, clean.labels);
        auto b = msp_confidence(base(x));
        auto b_ok = correctness(b.predicted, clean.labels);
        report.rows.push_back({sev, "QUANT", accuracy(q_ok), ece(q.confidence, q_ok, cfg.bins, cfg.binning).ece});
        report.rows.push_back({sev, "MSP", accuracy(b_ok), ece(b.confidence, b_ok, cfg.bins, cfg.binning).ece});
        if (platt) {
            report.rows.push_back({sev, "QUANT+platt", accuracy(q_ok),
                                   ece(platt_apply(q.confidence, *platt), q_ok, cfg.bins, cfg.binning).ece});
            report.rows.push_back({sev, "QUANT+isotonic", accuracy(q_ok),
                                   ece(isotonic_apply(q.confidence, *iso), q_ok, cfg.bins, cfg.binning).ece});
        }
    }
    return report;
}

inline void write_sweep_csv(std::ostream& out, const CalibrationReport& r) {
    out << "severity,method,accuracy,ece\n";
    for (const auto& row : r.rows) {
        out << detail::format_double(row.severity) << ',' << row.method << ',' << detail::format_double(row.accuracy)
            << ',' << detail::format_double(row.ece) << '\n';
    }
}

}  // namespace quantrep

#endif
