// Seeded synthetic suites shared by the unit tests and the acceptance run.
#ifndef QUANTREP_TEST_SUITES_HPP
#define QUANTREP_TEST_SUITES_HPP

#include "oracles.hpp"
#include "quantrep/quantrep.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace suite {

using namespace quantrep;

/// x = +-U(0.5, 3), label I[x > 0].
inline Dataset separable_1d(std::uint64_t seed, std::size_t n = 200) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    Dataset ds;
    ds.features = Matrix(n, 1);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = u(rng) * (i % 2 ? 1.0 : -1.0);
        ds.features(i, 0) = x;
        ds.labels[i] = x > 0.0 ? 1 : 0;
    }
    return ds;
}

/// Linearly realizable 1-D instance: 2..8 distinct points on a 0.1 lattice in
/// [-2, 2], split by a threshold between two of them, random direction.
inline Dataset realizable_instance(std::mt19937_64& rng) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> xs;
    while (xs.size() < n) {
        const double x = static_cast<double>(static_cast<int>(rng() % 41) - 20) / 10.0;
        if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    std::vector<double> sorted(xs);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t split = 1 + rng() % (n - 1);
    const double thr = 0.5 * (sorted[split - 1] + sorted[split]);
    const bool up = rng() % 2 == 0;
    Dataset ds;
    ds.features = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        ds.features(i, 0) = xs[i];
        ds.labels.push_back(up ? (xs[i] > thr) : (xs[i] < thr));
    }
    return ds;
}

struct ThresholdOptimumResult {
    double algorithm_loss = 0.0;
    double optimum = 0.0;
    std::size_t n = 0;
};

/// Sigmoid-MAE base fit, quantile fit at the default grid, indicator
/// simultaneous loss of the class-1 representation against the threshold
/// family optimum on the same dense grid.
inline ThresholdOptimumResult threshold_optimum_instance(const Dataset& ds, std::uint64_t seed) {
    FitConfig mae;
    mae.l2_reg = 0.0;
    mae.max_iter = 20000;
    mae.seed = seed;
    auto base = fit_sigmoid_mae(ds.features, ds.labels, mae).classifier;
    auto p1 = base_probabilities({base}, ds.features).column(0);
    auto model = fit_quantile_model(ds, binary_probability_columns(p1), QuantileGrid::make());
    ThresholdOptimumResult r;
    r.n = ds.size();
    r.algorithm_loss = simultaneous_loss([&](std::size_t i, std::size_t t) { return model.logit(1, t, ds.features.row(i)); },
                                         ds.labels, model.grid.dense, PredictionMode::indicator);
    r.optimum = oracle::threshold_family_optimum(ds.features.column(0), ds.labels, model.grid.dense, -2.0, 2.0);
    return r;
}

/// Latent-variable binary model used for the calibration checks.
inline LatentModelSpec latent_spec() {
    LatentModelSpec s;
    s.g_coefficients = {1.0, -0.5};
    s.g_intercept = 0.2;
    s.noise_kind = NoiseKind::homoskedastic_gaussian;
    s.noise_scale = 1.0;
    return s;
}

/// Quantile model fit with the generator's posterior as the base classifier.
inline QuantileModel oracle_model(const Dataset& train) {
    return fit_quantile_model(train, binary_probability_columns(*train.posterior), QuantileGrid::make());
}

/// Two-moons training set and OOD cluster from `seed`, ID test set from
/// seed + 1000, both detectors with LOF k = 20.
inline OodComparison two_moons_comparison(std::uint64_t seed) {
    TwoMoonsConfig cfg;
    cfg.seed = seed;
    auto data = gen_two_moons(cfg);
    TwoMoonsConfig test_cfg = cfg;
    test_cfg.seed = seed + 1000;
    auto test = gen_two_moons(test_cfg);
    FitConfig fit;
    auto model = fit_quantile_model(data.id, fit_base_classifiers(data.id, fit), QuantileGrid::make());
    return compare_ood_detectors(model, data.id.features, test.id.features, data.ood.features, 20);
}

/// Fit settings used for the shift-matching runs.
inline FitConfig shift_fit() {
    FitConfig f;
    f.l2_reg = 10.0;
    return f;
}

struct ShiftRun {
    double truth_deg = 0.0;
    double error_deg = 0.0;  // up to the model's reflection symmetry
    double max_mean_gap = 0.0;
    TransformEstimate estimate;
};

/// Gaussian pair at t0, an independent draw rotated by a seeded random angle
/// at t1; `rotate` = false leaves t1 unrotated.
inline ShiftRun shift_recovery(std::uint64_t seed, bool rotate = true, std::size_t n_per_class = 250) {
    auto t0 = gen_gaussian_pair(kShiftCenters, kShiftStds, n_per_class, seed);
    auto raw1 = gen_gaussian_pair(kShiftCenters, kShiftStds, n_per_class, seed + 100);
    std::mt19937_64 rng(seed + 7);
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    ShiftRun run;
    run.truth_deg = rotate ? angle(rng) : 0.0;
    Dataset t1 = raw1;
    t1.features = apply_transform(Transform::orthogonal(radians(run.truth_deg)), raw1.features);
    QuantileFitOptions opt;
    opt.fit = shift_fit();
    auto m0 = fit_quantile_model(t0, fit_base_classifiers(t0, opt.fit), QuantileGrid::make(), opt);
    run.estimate = estimate_transform(TransformFamily::orthogonal_2d, m0, t1, opt.fit);
    // The inverse map should be a rotation by -truth.
    run.error_deg = angle_distance_deg(-equivalent_rotation_deg(run.estimate.inverse, m0), run.truth_deg);
    Dataset pushed = t0;
    pushed.features = apply_transform(run.estimate.transform, t0.features);
    const auto a = class_means(pushed);
    const auto b = class_means(t1);
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        run.max_mean_gap = std::max(run.max_mean_gap, std::abs(a.data()[i] - b.data()[i]));
    }
    return run;
}

/// Every point of each class is mirrored through the origin, so the labelled
/// distribution is unchanged by x -> -x.
inline Dataset point_symmetric_pair(std::uint64_t seed, std::size_t n_per_class = 100) {
    auto half = gen_gaussian_pair({{{0.0, 0.0}, {0.0, 0.0}}}, kShiftStds, n_per_class, seed);
    Dataset ds = half;
    for (std::size_t i = 0; i < half.size(); ++i) {
        const std::array<double, 2> neg{-half.features(i, 0), -half.features(i, 1)};
        ds.features.append_row(neg);
        ds.labels.push_back(half.labels[i]);
    }
    return ds;
}

}  // namespace suite

#endif
