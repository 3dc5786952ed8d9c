#ifndef QUANTREP_OOD_HPP
#define QUANTREP_OOD_HPP

#include "core.hpp"
#include "dataset.hpp"
#include "quantile_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace quantrep {

struct UndefinedMetricError : ValidationError {
    using ValidationError::ValidationError;
};

namespace detail {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Neighborhood {
    double k_distance = 0.0;
    std::vector<std::size_t> index;
    std::vector<double> distance;
};

// k-distance neighbourhood: every point no farther than the k-th nearest
// one, so ties at the k-th distance are all included.
inline Neighborhood neighborhood(std::vector<std::pair<double, std::size_t>>& dist, std::size_t k) {
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    Neighborhood nb;
    nb.k_distance = dist[k - 1].first;
    for (const auto& [d, j] : dist) {
        if (d <= nb.k_distance) {
            nb.index.push_back(j);
            nb.distance.push_back(d);
        }
    }
    return nb;
}

inline void check_finite_scores(std::span<const double> scores, std::span<const int> is_id) {
    if (scores.size() != is_id.size()) throw ValidationError("scores and labels differ in length");
    if (!all_finite(scores)) throw ValidationError("scores must be finite");
    std::size_t pos = 0;
    for (int v : is_id) {
        if (v != 0 && v != 1) throw ValidationError("is_id must be 0/1");
        pos += static_cast<std::size_t>(v);
    }
    if (pos == 0 || pos == is_id.size()) {
        throw UndefinedMetricError("metric needs both in-distribution and out-of-distribution samples");
    }
}

}  // namespace detail

/// Floor on the mean reachability distance, reached only with more than k
/// exact duplicates.
inline constexpr double kLrdEpsilon = 1e-10;

/// Local outlier factor of each query relative to `reference`, negated so
/// that higher means more in-distribution. Reference points never count
/// themselves as neighbours; queries see the whole reference set.
inline std::vector<double> lof_scores(const Matrix& reference, const Matrix& queries, std::size_t k) {
    const std::size_t m = reference.rows();
    if (reference.cols() == 0) throw ValidationError("LOF needs at least one feature");
    if (queries.cols() != reference.cols()) throw ValidationError("query and reference dimensions differ");
    if (k == 0 || k >= m) {
        throw ValidationError("LOF needs 1 <= k < reference size (k=" + std::to_string(k) +
                              ", m=" + std::to_string(m) + ")");
    }

    std::vector<detail::Neighborhood> ref_nb(m);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) dist.emplace_back(detail::euclidean(reference.row(i), reference.row(j)), j);
        }
        ref_nb[i] = detail::neighborhood(dist, k);
    }
    auto lrd_of = [&](const detail::Neighborhood& nb) {
        double reach = 0.0;
        for (std::size_t n = 0; n < nb.index.size(); ++n) {
            reach += std::max(ref_nb[nb.index[n]].k_distance, nb.distance[n]);
        }
        return 1.0 / std::max(reach / static_cast<double>(nb.index.size()), kLrdEpsilon);
    };
    std::vector<double> ref_lrd(m);
    for (std::size_t i = 0; i < m; ++i) ref_lrd[i] = lrd_of(ref_nb[i]);

    std::vector<double> out(queries.rows());
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        dist.clear();
        for (std::size_t j = 0; j < m; ++j) dist.emplace_back(detail::euclidean(queries.row(q), reference.row(j)), j);
        auto nb = detail::neighborhood(dist, k);
        const double lrd_q = lrd_of(nb);
        double ratio = 0.0;
        for (std::size_t j : nb.index) ratio += ref_lrd[j];
        ratio /= static_cast<double>(nb.index.size()) * lrd_q;
        out[q] = -ratio;
    }
    return out;
}

/// Rank-based AUROC with ties counted 1/2; is_id marks the positive class.
inline double auroc(std::span<const double> scores, std::span<const int> is_id) {
    detail::check_finite_scores(scores, is_id);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (is_id[order[t]]) {
                rank_sum += avg_rank;
                n_pos += 1.0;
            }
        }
        i = j;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

/// TNR at the most selective threshold whose TPR still reaches `tpr_target`
/// (samples with score >= threshold are called in-distribution).
inline double tnr_at_tpr(std::span<const double> scores, std::span<const int> is_id, double tpr_target = 0.95) {
    detail::check_finite_scores(scores, is_id);
    if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw ValidationError("tpr_target must lie in (0, 1]");
    std::vector<double> id_scores;
    std::vector<double> ood_scores;
    for (std::size_t i = 0; i < scores.size(); ++i) (is_id[i] ? id_scores : ood_scores).push_back(scores[i]);
    std::sort(id_scores.begin(), id_scores.end(), std::greater<>());
    const double needed = std::ceil(tpr_target * static_cast<double>(id_scores.size()) - 1e-9);
    const std::size_t r = std::clamp<std::size_t>(static_cast<std::size_t>(needed), 1, id_scores.size());
    const double threshold = id_scores[r - 1];
    const auto below = std::count_if(ood_scores.begin(), ood_scores.end(), [&](double s) { return s < threshold; });
    return static_cast<double>(below) / static_cast<double>(ood_scores.size());
}

/// Best accuracy over every threshold position (all-ID, all-OOD and each
/// distinct score).
inline double detection_accuracy(std::span<const double> scores, std::span<const int> is_id) {
    detail::check_finite_scores(scores, is_id);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::size_t total_id = 0;
    for (int v : is_id) total_id += static_cast<std::size_t>(v);
    // Threshold below everything: all called ID.
    std::size_t correct = total_id;
    std::size_t best = correct;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Move this tie group to the OOD side.
        for (std::size_t t = i; t < j; ++t) {
            if (is_id[order[t]]) {
                --correct;
            } else {
                ++correct;
            }
        }
        best = std::max(best, correct);
        i = j;
    }
    return static_cast<double>(best) / static_cast<double>(n);
}

struct OodMetrics {
    double auroc = 0.0;
    double tnr_at_tpr95 = 0.0;
    double detection_accuracy = 0.0;
};

inline OodMetrics ood_metrics(std::span<const double> scores, std::span<const int> is_id) {
    return {auroc(scores, is_id), tnr_at_tpr(scores, is_id, 0.95), detection_accuracy(scores, is_id)};
}

/// Base-classifier logits (n x k), the baseline LOF input.
inline Matrix base_logits(const std::vector<LinearClassifier>& bases, const Matrix& features) {
    Matrix out(features.rows(), bases.size());
    for (std::size_t c = 0; c < bases.size(); ++c) {
        auto z = decision(bases[c], features);
        for (std::size_t i = 0; i < z.size(); ++i) out(i, c) = z[i];
    }
    return out;
}

inline std::vector<LinearClassifier> model_bases(const QuantileModel& model) {
    if (!model.has_linear_base()) throw ValidationError("model carries no linear base classifiers");
    std::vector<LinearClassifier> out;
    for (const auto& c : model.classes) out.push_back(*c.base);
    return out;
}

struct OodComparison {
    OodMetrics baseline;
    OodMetrics quantile;
};

/// Scores ID test and OOD samples with LOF fitted on the training set, once on
/// base-classifier logits and once on flattened quantile representations.
inline OodComparison compare_ood_detectors(const QuantileModel& model, const Matrix& train, const Matrix& id_test,
                                           const Matrix& ood, std::size_t lof_k = 20) {
    Matrix queries = id_test;
    for (std::size_t i = 0; i < ood.rows(); ++i) queries.append_row(ood.row(i));
    std::vector<int> is_id(queries.rows(), 0);
    std::fill(is_id.begin(), is_id.begin() + static_cast<std::ptrdiff_t>(id_test.rows()), 1);

    const auto bases = model_bases(model);
    OodComparison out;
    out.baseline = ood_metrics(lof_scores(base_logits(bases, train), base_logits(bases, queries), lof_k), is_id);
    out.quantile = ood_metrics(
        lof_scores(represent(model, train).flattened(), represent(model, queries).flattened(), lof_k), is_id);
    return out;
}

/// Quantile model built on random pseudo-labels instead of the ground truth.
/// Labels are a seeded random permutation of a balanced assignment.
inline QuantileModel random_label_quantile_model(const Matrix& features, int n_pseudo_classes, const FitConfig& fit,
                                                 std::uint64_t seed, const QuantileGrid& grid = QuantileGrid::make()) {
    if (n_pseudo_classes < 2) throw ValidationError("need at least two pseudo classes");
    if (features.rows() < 2 * static_cast<std::size_t>(n_pseudo_classes)) {
        throw ValidationError("need at least two samples per pseudo class");
    }
    Dataset ds;
    ds.features = features;
    ds.num_classes = n_pseudo_classes;
    ds.labels.resize(features.rows());
    for (std::size_t i = 0; i < ds.labels.size(); ++i) ds.labels[i] = static_cast<int>(i % n_pseudo_classes);
    std::mt19937_64 rng(seed);
    std::shuffle(ds.labels.begin(), ds.labels.end(), rng);
    auto bases = fit_base_classifiers(ds, fit);
    QuantileFitOptions opt;
    opt.fit = fit;
    return fit_quantile_model(ds, bases, grid, opt);
}

}  // namespace quantrep

#endif
