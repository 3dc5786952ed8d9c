#ifndef QUANTREP_QUANTILE_MODEL_HPP
#define QUANTREP_QUANTILE_MODEL_HPP

#include "core.hpp"
#include "dataset.hpp"
#include "isotonic.hpp"
#include "linear.hpp"
#include "spline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace quantrep {

/// Anchor taus (where classifiers are fitted) and dense taus (where the
/// representation is evaluated after interpolation).
struct QuantileGrid {
    std::vector<double> anchors;
    std::vector<double> dense;

    static std::vector<double> linspace(double lo, double hi, std::size_t n) {
        std::vector<double> v(n);
        if (n == 1) {
            v[0] = lo;
            return v;
        }
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        v.back() = hi;
        return v;
    }

    static QuantileGrid make(std::size_t n_anchor = 100, std::size_t n_dense = 1000, double lo = 0.01,
                             double hi = 0.99) {
        QuantileGrid g{linspace(lo, hi, n_anchor), linspace(lo, hi, n_dense)};
        g.validate();
        return g;
    }

    void validate() const {
        auto check = [](const std::vector<double>& v, const char* name) {
            if (v.empty()) throw ValidationError(std::string(name) + " grid is empty");
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!(v[i] > 0.0 && v[i] < 1.0)) throw ValidationError(std::string(name) + " tau outside (0, 1)");
                if (i > 0 && !(v[i] > v[i - 1])) {
                    throw ValidationError(std::string(name) + " grid must be strictly increasing");
                }
            }
        };
        check(anchors, "anchor");
        check(dense, "dense");
        if (dense.front() < anchors.front() - 1e-12 || dense.back() > anchors.back() + 1e-12) {
            throw RangeError("dense grid extends beyond the anchor range");
        }
    }

    std::size_t nearest_anchor(double tau) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < anchors.size(); ++i) {
            if (std::abs(anchors[i] - tau) < std::abs(anchors[best] - tau)) best = i;
        }
        return best;
    }

    /// Width of the tau-cell owned by each dense point when [0, 1] is split at
    /// midpoints between neighbours; the end cells extend to 0 and 1.
    std::vector<double> cell_widths() const {
        std::vector<double> w(dense.size());
        for (std::size_t t = 0; t < dense.size(); ++t) {
            const double lo = t == 0 ? 0.0 : 0.5 * (dense[t - 1] + dense[t]);
            const double hi = t + 1 == dense.size() ? 1.0 : 0.5 * (dense[t] + dense[t + 1]);
            w[t] = hi - lo;
        }
        return w;
    }

    bool operator==(const QuantileGrid&) const = default;
};

/// Fitted artefacts for one one-vs-rest task.
struct ClassQuantiles {
    std::optional<LinearClassifier> base;
    std::vector<LinearClassifier> anchors;  // unit norm, one per grid anchor
    std::vector<bool> degenerate;           // anchor saw a single pseudo-label
    Matrix dense;                           // n_dense x (d + 1), interpolated

    bool operator==(const ClassQuantiles&) const = default;
};

struct QuantileModel {
    QuantileGrid grid;
    int num_classes = 2;
    std::size_t dim = 0;
    std::vector<ClassQuantiles> classes;

    std::size_t num_taus() const { return grid.dense.size(); }

    double logit(std::size_t c, std::size_t t, std::span<const double> x) const {
        auto row = classes[c].dense.row(t);
        double z = row[dim];
        for (std::size_t j = 0; j < dim; ++j) z += row[j] * x[j];
        return z;
    }

    bool has_linear_base() const {
        return std::all_of(classes.begin(), classes.end(), [](const ClassQuantiles& q) { return q.base.has_value(); });
    }

    bool operator==(const QuantileModel&) const = default;
};

/// Pseudo-labels at quantile tau: I[f(x) > 1 - tau].
inline std::vector<int> modified_labels(std::span<const double> base_probs, double tau) {
    std::vector<int> out(base_probs.size());
    for (std::size_t i = 0; i < base_probs.size(); ++i) {
        out[i] = base_probs[i] > 1.0 - tau ? 1 : 0;
    }
    return out;
}

/// Weight n / (2 n_c) for a sample of class c; uniform when only one class occurs.
inline std::vector<double> class_balance_weights(const std::vector<int>& labels01) {
    if (labels01.empty()) throw ValidationError("class balance weights need at least one sample");
    const double n = static_cast<double>(labels01.size());
    const double n1 = static_cast<double>(std::count(labels01.begin(), labels01.end(), 1));
    const double n0 = n - n1;
    std::vector<double> w(labels01.size(), 1.0);
    if (n0 == 0.0 || n1 == 0.0) return w;
    for (std::size_t i = 0; i < labels01.size(); ++i) {
        w[i] = labels01[i] == 1 ? n / (2.0 * n1) : n / (2.0 * n0);
    }
    return w;
}

struct QuantileFitOptions {
    FitConfig fit;
    std::size_t threads = 1;
};

/// Per-class one-vs-rest probabilities from linear base classifiers. For a
/// binary problem a single classifier (class 1 vs 0) is accepted; class 0 then
/// uses its negation.
inline std::vector<LinearClassifier> expand_binary_bases(const std::vector<LinearClassifier>& bases, int num_classes) {
    if (num_classes == 2 && bases.size() == 1) {
        return {bases[0].negated(), bases[0]};
    }
    if (bases.size() != static_cast<std::size_t>(num_classes)) {
        throw ValidationError("need one base classifier per class (got " + std::to_string(bases.size()) + " for " +
                              std::to_string(num_classes) + " classes)");
    }
    return bases;
}

inline Matrix base_probabilities(const std::vector<LinearClassifier>& bases, const Matrix& features) {
    Matrix p(features.rows(), bases.size());
    for (std::size_t c = 0; c < bases.size(); ++c) {
        auto z = decision(bases[c], features);
        for (std::size_t i = 0; i < z.size(); ++i) p(i, c) = sigmoid(z[i]);
    }
    return p;
}

/// Binary probabilities p(y=1) expanded to the two one-vs-rest columns (1-p, p).
inline Matrix binary_probability_columns(std::span<const double> p1) {
    Matrix p(p1.size(), 2);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        p(i, 0) = 1.0 - p1[i];
        p(i, 1) = p1[i];
    }
    return p;
}

/// Generates quantile representations for an arbitrary base classifier given
/// through its one-vs-rest probabilities on the training features (n x k).
///
/// For every class c and anchor tau: pseudo-labels I[f_c(x) > 1 - tau],
/// class-balance weights on those labels (times any dataset weights), a
/// weighted logistic fit, L2 normalization. Coefficients are then carried to
/// the dense grid by natural cubic splines.
inline QuantileModel fit_quantile_model(const Dataset& data, const Matrix& base_probs, const QuantileGrid& grid,
                                        const QuantileFitOptions& options = {}) {
    grid.validate();
    options.fit.validate();
    if (base_probs.rows() != data.size()) throw ValidationError("base probabilities do not match dataset size");
    if (base_probs.cols() != static_cast<std::size_t>(data.num_classes)) {
        throw ValidationError("need one base probability column per class");
    }
    for (double p : base_probs.data()) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("base probabilities must lie in [0, 1]");
    }

    const std::size_t k = static_cast<std::size_t>(data.num_classes);
    const std::size_t na = grid.anchors.size();
    const std::size_t d = data.dim();

    QuantileModel model;
    model.grid = grid;
    model.num_classes = data.num_classes;
    model.dim = d;
    model.classes.resize(k);
    for (auto& cq : model.classes) {
        cq.anchors.resize(na);
        cq.degenerate.assign(na, false);
    }

    std::vector<std::vector<double>> probs(k);
    for (std::size_t c = 0; c < k; ++c) probs[c] = base_probs.column(c);

    auto run_task = [&](std::size_t task) {
        const std::size_t c = task / na;
        const std::size_t a = task % na;
        const double tau = grid.anchors[a];
        try {
            auto yplus = modified_labels(probs[c], tau);
            auto w = class_balance_weights(yplus);
            if (data.weights) {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] *= (*data.weights)[i];
            }
            auto fit = fit_weighted_logistic(data.features, yplus, w, options.fit);
            model.classes[c].anchors[a] = normalize_l2(fit.classifier);
            model.classes[c].degenerate[a] = fit.degenerate;
        } catch (const std::exception& e) {
            throw NumericalError("fit failed for class " + std::to_string(c) + ", tau " + std::to_string(tau) + ": " +
                                 e.what());
        }
    };

    const std::size_t tasks = k * na;
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, tasks);
    if (threads == 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t t = w; t < tasks; t += threads) run_task(t);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (auto& cq : model.classes) {
        Matrix rows(na, d + 1);
        for (std::size_t a = 0; a < na; ++a) {
            auto coef = cq.anchors[a].coefficients();
            std::copy(coef.begin(), coef.end(), rows.row(a).begin());
        }
        cq.dense = interpolate_coefficients(grid.anchors, rows, grid.dense);
    }
    return model;
}

/// Quantile fit driven by linear base classifiers (one per class, or a single
/// one for a binary problem). The classifiers are stored in the model.
inline QuantileModel fit_quantile_model(const Dataset& data, const std::vector<LinearClassifier>& bases,
                                        const QuantileGrid& grid, const QuantileFitOptions& options = {}) {
    auto expanded = expand_binary_bases(bases, data.num_classes);
    auto model = fit_quantile_model(data, base_probabilities(expanded, data.features), grid, options);
    for (std::size_t c = 0; c < expanded.size(); ++c) model.classes[c].base = expanded[c];
    return model;
}

/// One-vs-rest logistic base classifiers, one per class (unit sample weights).
inline std::vector<LinearClassifier> fit_base_classifiers(const Dataset& data, const FitConfig& config) {
    std::vector<LinearClassifier> out;
    for (int c = 0; c < data.num_classes; ++c) {
        std::vector<int> y(data.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = data.labels[i] == c ? 1 : 0;
        std::vector<double> w = data.weights ? *data.weights : std::vector<double>(y.size(), 1.0);
        out.push_back(fit_weighted_logistic(data.features, y, w, config).classifier);
    }
    return out;
}

// ---------------------------------------------------------------------------

/// Logits of every (sample, class, dense tau), stored sample-major.
struct QuantileRepresentation {
    std::size_t samples = 0;
    std::size_t classes = 0;
    std::size_t taus = 0;
    std::vector<double> values;
    std::vector<double> tau_grid;

    double& at(std::size_t i, std::size_t c, std::size_t t) { return values[(i * classes + c) * taus + t]; }
    double at(std::size_t i, std::size_t c, std::size_t t) const { return values[(i * classes + c) * taus + t]; }

    std::span<const double> profile(std::size_t i, std::size_t c) const {
        return {values.data() + (i * classes + c) * taus, taus};
    }

    /// Flattened n x (k * n_tau) matrix, as fed to LOF.
    Matrix flattened() const { return Matrix(samples, classes * taus, values); }
};

inline void check_dim(const QuantileModel& model, const Matrix& features) {
    if (features.cols() != model.dim) {
        throw ValidationError("feature dimension " + std::to_string(features.cols()) +
                              " does not match model dimension " + std::to_string(model.dim));
    }
}

inline QuantileRepresentation represent(const QuantileModel& model, const Matrix& features) {
    check_dim(model, features);
    QuantileRepresentation rep;
    rep.samples = features.rows();
    rep.classes = model.classes.size();
    rep.taus = model.num_taus();
    rep.tau_grid = model.grid.dense;
    rep.values.resize(rep.samples * rep.classes * rep.taus);
    for (std::size_t i = 0; i < rep.samples; ++i) {
        auto x = features.row(i);
        for (std::size_t c = 0; c < rep.classes; ++c) {
            for (std::size_t t = 0; t < rep.taus; ++t) rep.at(i, c, t) = model.logit(c, t, x);
        }
    }
    return rep;
}

/// Projects every tau-profile onto nondecreasing sequences (off by default in
/// the pipeline; monotonicity is normally measured, not imposed).
inline void project_monotone(QuantileRepresentation& rep) {
    for (std::size_t i = 0; i < rep.samples; ++i) {
        for (std::size_t c = 0; c < rep.classes; ++c) {
            auto fitted = pool_adjacent_violators(rep.profile(i, c));
            std::copy(fitted.begin(), fitted.end(), rep.values.begin() + (i * rep.classes + c) * rep.taus);
        }
    }
}

struct MonotonicityReport {
    Matrix per_profile;  // samples x classes
    double aggregate = 0.0;
};

/// Fraction of adjacent tau pairs where the profile drops by more than 1e-9.
inline double profile_violation_rate(std::span<const double> profile) {
    if (profile.size() < 2) throw ValidationError("monotonicity needs at least two taus");
    std::size_t bad = 0;
    for (std::size_t t = 0; t + 1 < profile.size(); ++t) {
        if (profile[t + 1] < profile[t] - 1e-9) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(profile.size() - 1);
}

inline MonotonicityReport monotonicity_violation_rate(const QuantileRepresentation& rep) {
    MonotonicityReport r;
    r.per_profile = Matrix(rep.samples, rep.classes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rep.samples; ++i) {
        for (std::size_t c = 0; c < rep.classes; ++c) {
            r.per_profile(i, c) = profile_violation_rate(rep.profile(i, c));
            sum += r.per_profile(i, c);
        }
    }
    const double n = static_cast<double>(rep.samples * rep.classes);
    r.aggregate = n > 0 ? sum / n : 0.0;
    return r;
}

/// Aggregate violation rate computed without materialising the representation.
inline double monotonicity_violation_rate(const QuantileModel& model, const Matrix& features) {
    check_dim(model, features);
    if (model.num_taus() < 2) throw ValidationError("monotonicity needs at least two taus");
    std::size_t bad = 0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto x = features.row(i);
        for (std::size_t c = 0; c < model.classes.size(); ++c) {
            double prev = model.logit(c, 0, x);
            for (std::size_t t = 1; t < model.num_taus(); ++t) {
                const double cur = model.logit(c, t, x);
                if (cur < prev - 1e-9) ++bad;
                prev = cur;
            }
        }
    }
    const double pairs = static_cast<double>(features.rows() * model.classes.size() * (model.num_taus() - 1));
    return pairs > 0 ? static_cast<double>(bad) / pairs : 0.0;
}

/// Riemann approximation of P(y = c) = integral over tau of I[Q_c(x, tau) >= 0]:
/// each dense tau contributes the width of its cell. One-vs-rest columns are
/// not renormalized.
inline std::vector<double> quantile_probability(const QuantileRepresentation& rep, std::size_t c) {
    if (rep.taus == 0) throw ValidationError("empty tau grid");
    if (c >= rep.classes) throw ValidationError("class index out of range");
    const QuantileGrid g{rep.tau_grid, rep.tau_grid};
    const auto w = g.cell_widths();
    std::vector<double> out(rep.samples, 0.0);
    for (std::size_t i = 0; i < rep.samples; ++i) {
        auto prof = rep.profile(i, c);
        double p = 0.0;
        for (std::size_t t = 0; t < rep.taus; ++t) {
            if (prof[t] >= 0.0) p += w[t];
        }
        out[i] = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

/// Same as quantile_probability for every class, straight from the model
/// (n x k), without holding the full representation in memory.
inline Matrix quantile_probabilities(const QuantileModel& model, const Matrix& features) {
    check_dim(model, features);
    const auto w = model.grid.cell_widths();
    Matrix out(features.rows(), model.classes.size());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto x = features.row(i);
        for (std::size_t c = 0; c < model.classes.size(); ++c) {
            double p = 0.0;
            for (std::size_t t = 0; t < model.num_taus(); ++t) {
                if (model.logit(c, t, x) >= 0.0) p += w[t];
            }
            out(i, c) = std::clamp(p, 0.0, 1.0);
        }
    }
    return out;
}

/// Fraction of samples where the anchor nearest tau = 0.5 gives the same hard
/// label as the base classifier (I[f > 0.5]), per class.
inline std::vector<double> median_agreement(const QuantileModel& model, const Matrix& features,
                                            const Matrix& base_probs) {
    check_dim(model, features);
    const std::size_t a = model.grid.nearest_anchor(0.5);
    std::vector<double> out(model.classes.size(), 0.0);
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        const auto& clf = model.classes[c].anchors[a];
        std::size_t agree = 0;
        for (std::size_t i = 0; i < features.rows(); ++i) {
            const bool anchor_pos = clf.decision(features.row(i)) >= 0.0;
            const bool base_pos = base_probs(i, c) > 0.5;
            if (anchor_pos == base_pos) ++agree;
        }
        out[c] = features.rows() ? static_cast<double>(agree) / static_cast<double>(features.rows()) : 1.0;
    }
    return out;
}

}  // namespace quantrep

#endif
