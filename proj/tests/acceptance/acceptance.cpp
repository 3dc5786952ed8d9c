// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
#include "oracles/cli_runs.hpp"
#include "oracles/oracles.hpp"
#include "oracles/suites.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace quantrep;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Outcome duality() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        double y_hat = u(rng);
        double tau = u(rng);
        if (y_hat == 0.0) y_hat = 0.5;
        if (tau == 0.0) tau = 0.5;
        worst = std::max(worst, std::abs(duality_residual(y_hat, static_cast<int>(rng() % 2), tau)));
    }
    const double s = seconds_since(t0);
    return {worst <= 1e-12 && s < 5.0, fmt("max residual %.3g, %.2f s", worst, s)};
}

Outcome calibration_of_quantile_probabilities() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = suite::latent_spec();
    auto model = suite::oracle_model(gen_latent_binary(spec, 4000, {}, 20));
    auto test = gen_latent_binary(spec, 50000, {}, 21);
    auto p = quantile_probabilities(model, test.features).column(1);
    const double e = ece(p, test.labels, 15, Binning::equal_width).ece;
    const double s = seconds_since(t0);
    return {e < 0.02 && s < 120.0, fmt("ECE %.4f, %.1f s", e, s)};
}

Outcome threshold_optimality() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(42);
    double worst = -1e300;
    for (int inst = 0; inst < 20; ++inst) {
        auto ds = suite::realizable_instance(rng);
        auto r = suite::threshold_optimum_instance(ds, static_cast<std::uint64_t>(inst));
        worst = std::max(worst, r.algorithm_loss - r.optimum);
    }
    const double s = seconds_since(t0);
    return {worst <= 1e-9 && s < 60.0, fmt("max excess loss %.3g, %.1f s", worst, s)};
}

Outcome two_moons_ood() {
    bool ok = true;
    std::ostringstream d;
    d << "AUROC gains:";
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto r = suite::two_moons_comparison(seed);
        const double gain = r.quantile.auroc - r.baseline.auroc;
        ok = ok && gain >= 0.05;
        d << fmt(" %.3f", gain);
    }
    return {ok, d.str()};
}

Outcome lof_oracle() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        Matrix pts(50, 2);
        for (auto& v : pts.data()) v = g(rng);
        const std::size_t k = 1 + rng() % 15;
        auto got = lof_scores(pts, pts, k);
        auto want = oracle::lof(pts, pts, k);
        for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
    return {worst <= 1e-9, fmt("max abs diff %.3g", worst)};
}

Outcome metric_oracles() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed + 600);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> s(200);
        std::vector<int> id(200);
        for (std::size_t i = 0; i < 200; ++i) {
            id[i] = static_cast<int>(rng() % 2);
            s[i] = g(rng) + 0.5 * id[i];
            if (seed % 2) s[i] = std::round(s[i] * 3.0) / 3.0;
        }
        id[0] = 1;
        id[1] = 0;
        worst = std::max(worst, std::abs(auroc(s, id) - oracle::auroc(s, id)));
        worst = std::max(worst, std::abs(detection_accuracy(s, id) - oracle::detection_accuracy(s, id)));
    }
    return {worst <= 1e-12, fmt("max abs diff %.3g", worst)};
}

Outcome interpolation() {
    auto ds = suite::separable_1d(7);
    auto model = fit_quantile_model(ds, fit_base_classifiers(ds, {}), QuantileGrid::make());
    const auto& g = model.grid;
    double at_anchor = 0.0;
    double stored = 0.0;
    for (const auto& cls : model.classes) {
        Matrix rows(g.anchors.size(), model.dim + 1);
        for (std::size_t a = 0; a < g.anchors.size(); ++a) {
            auto c = cls.anchors[a].coefficients();
            std::copy(c.begin(), c.end(), rows.row(a).begin());
        }
        auto back = interpolate_coefficients(g.anchors, rows, g.anchors);
        for (std::size_t i = 0; i < rows.data().size(); ++i) {
            at_anchor = std::max(at_anchor, std::abs(back.data()[i] - rows.data()[i]));
        }
        auto dense = interpolate_coefficients(g.anchors, rows, g.dense);
        for (std::size_t i = 0; i < dense.data().size(); ++i) {
            stored = std::max(stored, std::abs(dense.data()[i] - cls.dense.data()[i]));
        }
    }
    Matrix line(g.anchors.size(), 1);
    for (std::size_t a = 0; a < g.anchors.size(); ++a) line(a, 0) = 2.0 - 3.5 * g.anchors[a];
    auto dense = interpolate_coefficients(g.anchors, line, g.dense);
    double linear = 0.0;
    for (std::size_t t = 0; t < g.dense.size(); ++t) linear = std::max(linear, std::abs(dense(t, 0) - (2.0 - 3.5 * g.dense[t])));
    return {at_anchor <= 1e-9 && stored <= 1e-9 && linear <= 1e-10,
            fmt("anchor %.3g, stored dense %.3g, linear %.3g", at_anchor, stored, linear)};
}

Outcome shift_recovery() {
    bool ok = true;
    std::ostringstream d;
    d << "errors (deg):";
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto run = suite::shift_recovery(seed);
        ok = ok && run.error_deg <= 5.0;
        d << fmt(" %.2f", run.error_deg);
    }
    auto ds = suite::point_symmetric_pair(0);
    QuantileFitOptions opt;
    opt.fit = suite::shift_fit();
    auto m0 = fit_quantile_model(ds, fit_base_classifiers(ds, opt.fit), QuantileGrid::make(), opt);
    auto est = estimate_transform(TransformFamily::orthogonal_2d, m0, ds, opt.fit);
    const double plus = matching_objective(m0, est.model_t1, Transform::identity(2), ds.features);
    const double minus = matching_objective(m0, est.model_t1, Transform::orthogonal(std::numbers::pi), ds.features);
    ok = ok && std::abs(plus - minus) <= 1e-6 && est.ambiguous();
    d << fmt("; symmetric tie gap %.3g", std::abs(plus - minus)) << ", " << est.near_ties.size() << " near-ties";
    return {ok, d.str()};
}

Outcome corrections_under_corruption() {
    const auto spec = suite::latent_spec();
    bool ok = true;
    std::ostringstream d;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto model = suite::oracle_model(gen_latent_binary(spec, 2000, {}, seed * 3));
        auto val = gen_latent_binary(spec, 2000, {}, seed * 3 + 1);
        auto test = gen_latent_binary(spec, 5000, {}, seed * 3 + 2);
        SweepConfig cfg;
        cfg.seed = seed;
        auto rep = corruption_sweep(model, latent_oracle_scorer(spec), test, cfg, &val);
        const double hi = cfg.severities.back();
        const double raw = rep.find(hi, "QUANT").ece;
        const double platt = rep.find(hi, "QUANT+platt").ece;
        const double iso = rep.find(hi, "QUANT+isotonic").ece;
        ok = ok && *rep.validation_ece_isotonic <= *rep.validation_ece_before + 1e-9 && platt >= 0.8 * raw &&
             iso >= 0.8 * raw;
        d << fmt(" [val %.4f->%.4f; hi %.3f", *rep.validation_ece_before, *rep.validation_ece_isotonic, raw)
          << fmt(" platt %.3f iso %.3f]", platt, iso);
    }
    return {ok, d.str()};
}

Outcome monotonicity_and_agreement() {
    double worst_rate = 0.0;
    double worst_agree = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto ds = suite::separable_1d(seed);
        auto bases = fit_base_classifiers(ds, {});
        auto model = fit_quantile_model(ds, bases, QuantileGrid::make());
        worst_rate = std::max(worst_rate, monotonicity_violation_rate(model, ds.features));
        for (double a : median_agreement(model, ds.features, base_probabilities(bases, ds.features))) {
            worst_agree = std::min(worst_agree, a);
        }
    }
    return {worst_rate < 0.01 && worst_agree >= 0.99, fmt("violation rate %.4f, agreement %.4f", worst_rate, worst_agree)};
}

Outcome cli_determinism() {
    namespace fs = std::filesystem;
    const auto root = fs::temp_directory_path() / "quantrep_acceptance";
    fs::create_directories(root);
    for (const char* run : {"a", "b"}) {
        const auto failed = cli::full_pipeline(root / run);
        if (!failed.empty()) return {false, std::string("step failed: ") + failed};
    }
    auto a = cli::snapshot(root / "a");
    auto b = cli::snapshot(root / "b");
    std::size_t differing = 0;
    for (const auto& [name, content] : a) {
        if (!b.count(name) || b[name] != content) ++differing;
    }
    if (a.size() != b.size()) ++differing;
    return {differing == 0 && !a.empty(), std::to_string(a.size()) + " files, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"duality residual", duality},
        {"quantile-probability calibration", calibration_of_quantile_probabilities},
        {"small-instance threshold optimality", threshold_optimality},
        {"two-moons OOD gain", two_moons_ood},
        {"LOF oracle", lof_oracle},
        {"AUROC / detection-accuracy oracles", metric_oracles},
        {"coefficient interpolation", interpolation},
        {"shift recovery and symmetric tie", shift_recovery},
        {"corrections under corruption", corrections_under_corruption},
        {"monotonicity and median agreement", monotonicity_and_agreement},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
