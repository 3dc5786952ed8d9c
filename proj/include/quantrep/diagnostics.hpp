#ifndef QUANTREP_DIAGNOSTICS_HPP
#define QUANTREP_DIAGNOSTICS_HPP

#include "core.hpp"
#include "quantile_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace quantrep {

/// Symmetric d x d matrix whose entries may be undefined (zero variance).
struct CorrelationMatrix {
    std::size_t dim = 0;
    std::vector<std::optional<double>> values;

    std::optional<double> operator()(std::size_t i, std::size_t j) const { return values[i * dim + j]; }
};

/// Pearson correlation; empty when either input has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("correlation inputs differ in length");
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace detail {

inline CorrelationMatrix correlate_columns(const std::vector<std::vector<double>>& cols) {
    CorrelationMatrix out;
    out.dim = cols.size();
    out.values.resize(out.dim * out.dim);
    for (std::size_t i = 0; i < out.dim; ++i) {
        for (std::size_t j = i; j < out.dim; ++j) {
            auto r = pearson(cols[i], cols[j]);
            if (i == j && r) r = 1.0;
            out.values[i * out.dim + j] = r;
            out.values[j * out.dim + i] = r;
        }
    }
    return out;
}

}  // namespace detail

/// Correlation between the dense coefficient trajectories of each pair of
/// features, concatenated over (class, tau).
inline CorrelationMatrix coefficient_cross_correlation(const QuantileModel& model) {
    if (model.dim < 2) throw ValidationError("cross-correlation needs at least two features");
    std::vector<std::vector<double>> cols(model.dim);
    for (const auto& cls : model.classes) {
        for (std::size_t t = 0; t < cls.dense.rows(); ++t) {
            for (std::size_t j = 0; j < model.dim; ++j) cols[j].push_back(cls.dense(t, j));
        }
    }
    return detail::correlate_columns(cols);
}

/// Correlation between feature columns over samples.
inline CorrelationMatrix raw_feature_correlation(const Matrix& features) {
    if (features.cols() < 2) throw ValidationError("cross-correlation needs at least two features");
    std::vector<std::vector<double>> cols(features.cols());
    for (std::size_t j = 0; j < features.cols(); ++j) cols[j] = features.column(j);
    return detail::correlate_columns(cols);
}

}  // namespace quantrep

#endif
