#ifndef QUANTREP_LINEAR_HPP
#define QUANTREP_LINEAR_HPP

#include "core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace quantrep {

struct DegenerateClassifierError : NumericalError {
    using NumericalError::NumericalError;
};

/// Logit of the constant classifier returned for single-class fits.
inline constexpr double kDegenerateLogit = 20.0;

struct LinearClassifier {
    std::vector<double> weights;
    double bias = 0.0;
    bool normalized = false;

    std::size_t dim() const { return weights.size(); }

    double decision(std::span<const double> x) const { return dot(weights, x) + bias; }

    /// (weights..., bias) as one row.
    std::vector<double> coefficients() const {
        std::vector<double> c(weights);
        c.push_back(bias);
        return c;
    }

    static LinearClassifier from_coefficients(std::span<const double> c, bool normalized = false) {
        LinearClassifier clf;
        clf.weights.assign(c.begin(), c.end() - 1);
        clf.bias = c.back();
        clf.normalized = normalized;
        return clf;
    }

    LinearClassifier negated() const {
        LinearClassifier out = *this;
        for (auto& w : out.weights) w = -w;
        out.bias = -out.bias;
        return out;
    }

    bool operator==(const LinearClassifier&) const = default;
};

inline void to_json(nlohmann::json& j, const LinearClassifier& c) {
    j = {{"weights", c.weights}, {"bias", c.bias}, {"normalized", c.normalized}};
}

inline void from_json(const nlohmann::json& j, LinearClassifier& c) {
    c.weights = j.at("weights").get<std::vector<double>>();
    c.bias = j.at("bias").get<double>();
    c.normalized = j.value("normalized", false);
}

struct FitConfig {
    double l2_reg = 1e-4;
    std::size_t max_iter = 500;
    // Stop once |gradient| <= tol * max(1, total sample weight).
    double tol = 1e-10;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(l2_reg >= 0.0)) throw ValidationError("l2_reg must be >= 0");
        if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
        if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    }
};

struct FitResult {
    LinearClassifier classifier;
    bool converged = false;
    bool degenerate = false;
    std::size_t iterations = 0;
    double objective = 0.0;
};

inline std::vector<double> decision(const LinearClassifier& clf, const Matrix& features) {
    if (features.cols() != clf.dim()) {
        throw ValidationError("feature dimension " + std::to_string(features.cols()) +
                              " does not match classifier dimension " + std::to_string(clf.dim()));
    }
    std::vector<double> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out[i] = clf.decision(features.row(i));
    }
    return out;
}

/// Scales (weights, bias) to unit L2 norm. Logit signs are unchanged.
inline LinearClassifier normalize_l2(const LinearClassifier& clf) {
    double ss = clf.bias * clf.bias;
    for (double w : clf.weights) ss += w * w;
    if (!(ss > 0.0) || !std::isfinite(ss)) {
        throw DegenerateClassifierError("cannot normalize an all-zero classifier");
    }
    const double n = std::sqrt(ss);
    LinearClassifier out = clf;
    if (clf.normalized && std::abs(n - 1.0) <= 1e-15) {
        return out;
    }
    for (auto& w : out.weights) w /= n;
    out.bias /= n;
    out.normalized = true;
    return out;
}

namespace detail {

inline void check_binary_inputs(const Matrix& x, const std::vector<int>& y, const std::vector<double>* w) {
    if (x.rows() != y.size()) throw ValidationError("feature rows do not match label count");
    if (x.rows() == 0) throw ValidationError("cannot fit on an empty dataset");
    if (!all_finite(x.data())) throw ValidationError("non-finite feature value");
    for (int v : y) {
        if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
    }
    if (w) {
        if (w->size() != y.size()) throw ValidationError("sample weight count does not match label count");
        for (double v : *w) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("sample weights must be positive");
        }
    }
}

inline std::optional<int> single_class(const std::vector<int>& y) {
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (has0 && has1) return std::nullopt;
    return has1 ? 1 : 0;
}

inline FitResult constant_fit(int label, std::size_t d) {
    FitResult r;
    r.classifier.weights.assign(d, 0.0);
    r.classifier.bias = label == 1 ? kDegenerateLogit : -kDegenerateLogit;
    r.converged = true;
    r.degenerate = true;
    return r;
}

/// In-place Cholesky solve of A x = b for symmetric positive definite A (p x p).
inline bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) {
        double diag = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
        if (!(diag > 0.0)) return false;
        const double ljj = std::sqrt(diag);
        a[j * p + j] = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = s / ljj;
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * p + k] * b[k];
        b[i] = s / a[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= a[k * p + i] * b[k];
        b[i] = s / a[i * p + i];
    }
    return true;
}

inline double row_logit(std::span<const double> x, std::span<const double> theta) {
    double z = theta.back();
    for (std::size_t j = 0; j < x.size(); ++j) z += theta[j] * x[j];
    return z;
}

}  // namespace detail

/// Weighted logistic objective: sum_i w_i * logloss_i + (l2/2) * |weights|^2.
/// The bias is not penalized. theta is (weights..., bias).
class LogisticObjective {
public:
    LogisticObjective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double l2)
        : x_(x), y_(y), w_(w), l2_(l2) {}

    std::size_t num_params() const { return x_.cols() + 1; }

    double value(std::span<const double> theta) const {
        double f = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            const double z = detail::row_logit(x_.row(i), theta);
            f += w_[i] * (softplus(z) - y_[i] * z);
        }
        for (std::size_t j = 0; j + 1 < theta.size(); ++j) f += 0.5 * l2_ * theta[j] * theta[j];
        return f;
    }

    std::vector<double> gradient(std::span<const double> theta) const {
        const std::size_t d = x_.cols();
        std::vector<double> g(d + 1, 0.0);
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            auto xi = x_.row(i);
            const double r = w_[i] * (sigmoid(detail::row_logit(xi, theta)) - y_[i]);
            for (std::size_t j = 0; j < d; ++j) g[j] += r * xi[j];
            g[d] += r;
        }
        for (std::size_t j = 0; j < d; ++j) g[j] += l2_ * theta[j];
        return g;
    }

    /// Row-major (d+1) x (d+1) Hessian.
    std::vector<double> hessian(std::span<const double> theta) const {
        const std::size_t p = x_.cols() + 1;
        std::vector<double> h(p * p, 0.0);
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            auto xi = x_.row(i);
            const double s = sigmoid(detail::row_logit(xi, theta));
            const double c = w_[i] * s * (1.0 - s);
            if (c == 0.0) continue;
            for (std::size_t a = 0; a < p; ++a) {
                const double xa = a + 1 < p ? xi[a] : 1.0;
                for (std::size_t b = 0; b <= a; ++b) {
                    const double xb = b + 1 < p ? xi[b] : 1.0;
                    h[a * p + b] += c * xa * xb;
                }
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < a; ++b) h[b * p + a] = h[a * p + b];
        }
        for (std::size_t j = 0; j + 1 < p; ++j) h[j * p + j] += l2_;
        return h;
    }

private:
    const Matrix& x_;
    const std::vector<int>& y_;
    const std::vector<double>& w_;
    double l2_;
};

/// Minimizes the weighted logistic objective by damped Newton steps with a
/// backtracking (Armijo) line search, starting from zero. Falls back to a
/// gradient step whenever the Newton system is not positive definite.
inline FitResult fit_weighted_logistic(const Matrix& features, const std::vector<int>& labels01,
                                       const std::vector<double>& sample_weights, const FitConfig& config) {
    config.validate();
    detail::check_binary_inputs(features, labels01, &sample_weights);
    const std::size_t d = features.cols();
    if (auto c = detail::single_class(labels01)) {
        return detail::constant_fit(*c, d);
    }

    LogisticObjective obj(features, labels01, sample_weights, config.l2_reg);
    const std::size_t p = d + 1;
    double total_weight = 0.0;
    for (double w : sample_weights) total_weight += w;
    const double gtol = config.tol * std::max(1.0, total_weight);

    std::vector<double> theta(p, 0.0);
    double f = obj.value(theta);
    FitResult result;
    std::size_t it = 0;
    for (; it < config.max_iter; ++it) {
        auto g = obj.gradient(theta);
        if (norm2(g) <= gtol) {
            result.converged = true;
            break;
        }
        auto h = obj.hessian(theta);
        double trace = 0.0;
        for (std::size_t a = 0; a < p; ++a) trace += h[a * p + a];
        const double jitter = 1e-12 * (1.0 + trace / static_cast<double>(p));
        for (std::size_t a = 0; a < p; ++a) h[a * p + a] += jitter;

        std::vector<double> step(g);
        bool newton = detail::cholesky_solve(h, step, p);
        for (auto& s : step) s = -s;
        double slope = dot(g, step);
        if (!newton || !(slope < 0.0) || !all_finite(step)) {
            step = g;
            for (auto& s : step) s = -s;
            slope = -dot(g, g);
        }

        double t = 1.0;
        std::vector<double> trial(p);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] + t * step[j];
            const double ft = obj.value(trial);
            if (ft <= f + 1e-4 * t * slope) {
                theta = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left; the iterate is as good as it gets.
            result.converged = norm2(g) <= std::sqrt(gtol);
            break;
        }
    }
    result.iterations = it;
    result.objective = f;
    result.classifier = LinearClassifier::from_coefficients(theta);
    return result;
}

/// Convenience overload with unit sample weights.
inline FitResult fit_logistic(const Matrix& features, const std::vector<int>& labels01, const FitConfig& config) {
    return fit_weighted_logistic(features, labels01, std::vector<double>(labels01.size(), 1.0), config);
}

/// sum_i |y_i - sigmoid(z_i)| + (l2/2)|weights|^2, written as sum_i sigmoid(-m_i z_i)
/// with margin sign m_i = 2 y_i - 1.
inline double sigmoid_mae_objective(const Matrix& x, const std::vector<int>& y, double l2,
                                    std::span<const double> theta) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double m = y[i] == 1 ? 1.0 : -1.0;
        f += sigmoid(-m * detail::row_logit(x.row(i), theta));
    }
    for (std::size_t j = 0; j + 1 < theta.size(); ++j) f += 0.5 * l2 * theta[j] * theta[j];
    return f;
}

inline std::vector<double> sigmoid_mae_gradient(const Matrix& x, const std::vector<int>& y, double l2,
                                                std::span<const double> theta) {
    const std::size_t d = x.cols();
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        const double m = y[i] == 1 ? 1.0 : -1.0;
        const double s = sigmoid(-m * detail::row_logit(xi, theta));
        const double r = -m * s * (1.0 - s);
        for (std::size_t j = 0; j < d; ++j) g[j] += r * xi[j];
        g[d] += r;
    }
    for (std::size_t j = 0; j < d; ++j) g[j] += l2 * theta[j];
    return g;
}

/// Local minimizer of the (non-convex) sigmoid MAE loss. Gradient descent with
/// Armijo backtracking and step growth, restarted from 5 seeded N(0, 0.1)
/// initializations; the best restart wins.
inline FitResult fit_sigmoid_mae(const Matrix& features, const std::vector<int>& labels01, const FitConfig& config) {
    config.validate();
    detail::check_binary_inputs(features, labels01, nullptr);
    const std::size_t d = features.cols();
    if (auto c = detail::single_class(labels01)) {
        return detail::constant_fit(*c, d);
    }
    const std::size_t p = d + 1;
    const double gtol = config.tol * std::max<double>(1.0, static_cast<double>(labels01.size()));
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init(0.0, 0.1);

    FitResult best;
    best.objective = std::numeric_limits<double>::infinity();
    constexpr int kRestarts = 5;
    for (int r = 0; r < kRestarts; ++r) {
        std::vector<double> theta(p);
        for (auto& v : theta) v = init(rng);
        double f = sigmoid_mae_objective(features, labels01, config.l2_reg, theta);
        double step = 1.0;
        bool converged = false;
        std::size_t it = 0;
        std::vector<double> trial(p);
        for (; it < config.max_iter; ++it) {
            auto g = sigmoid_mae_gradient(features, labels01, config.l2_reg, theta);
            const double gg = dot(g, g);
            if (std::sqrt(gg) <= gtol) {
                converged = true;
                break;
            }
            bool accepted = false;
            for (int ls = 0; ls < 80; ++ls) {
                for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] - step * g[j];
                const double ft = sigmoid_mae_objective(features, labels01, config.l2_reg, trial);
                if (ft <= f - 1e-4 * step * gg) {
                    theta = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                converged = true;
                break;
            }
            step *= 2.0;
        }
        if (f < best.objective) {
            best.objective = f;
            best.classifier = LinearClassifier::from_coefficients(theta);
            best.converged = converged;
            best.iterations = it;
        }
    }
    return best;
}

}  // namespace quantrep

#endif
