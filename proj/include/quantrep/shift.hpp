#ifndef QUANTREP_SHIFT_HPP
#define QUANTREP_SHIFT_HPP

#include "core.hpp"
#include "dataset.hpp"
#include "linear.hpp"
#include "quantile_model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace quantrep {

enum class TransformFamily { orthogonal_2d, affine };

inline TransformFamily parse_transform_family(const std::string& s) {
    if (s == "orthogonal-2d") return TransformFamily::orthogonal_2d;
    if (s == "affine") return TransformFamily::affine;
    throw ConfigError("unknown transform family '" + s + "'");
}

inline std::string to_string(TransformFamily f) {
    return f == TransformFamily::orthogonal_2d ? "orthogonal-2d" : "affine";
}

inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double radians(double deg) { return deg * std::numbers::pi / 180.0; }

/// Angle in [0, 360).
inline double wrap_degrees(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r >= 360.0 ? 0.0 : r;
}

/// Smallest absolute difference between two angles, in degrees.
inline double angle_distance_deg(double a, double b) {
    const double d = wrap_degrees(a - b);
    return std::min(d, 360.0 - d);
}

namespace detail {

// Gauss-Jordan inverse with partial pivoting; empty result when singular.
inline std::optional<Matrix> invert(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix m = a;
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        }
        if (m(piv, col) == 0.0 || !std::isfinite(m(piv, col))) return std::nullopt;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(piv, j), m(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const double p = m(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            m(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                m(r, j) -= f * m(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

inline double norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

}  // namespace detail

/// Largest condition number (1-norm) accepted for an affine map.
inline constexpr double kMaxCondition = 1e8;

/// x -> A x + b. The orthogonal family is R(angle) * diag(1, -1 if reflection).
struct Transform {
    TransformFamily family = TransformFamily::orthogonal_2d;
    double angle = 0.0;  // radians
    bool reflection = false;
    Matrix a;
    std::vector<double> b;

    static Transform orthogonal(double angle_rad, bool reflect = false) {
        Transform t;
        t.family = TransformFamily::orthogonal_2d;
        t.angle = angle_rad;
        t.reflection = reflect;
        return t;
    }

    static Transform affine(Matrix a, std::vector<double> b) {
        Transform t;
        t.family = TransformFamily::affine;
        t.a = std::move(a);
        t.b = std::move(b);
        t.validate();
        return t;
    }

    static Transform identity(std::size_t d) {
        if (d == 2) return orthogonal(0.0);
        Matrix eye(d, d);
        for (std::size_t i = 0; i < d; ++i) eye(i, i) = 1.0;
        return affine(std::move(eye), std::vector<double>(d, 0.0));
    }

    std::size_t dim() const { return family == TransformFamily::orthogonal_2d ? 2 : a.rows(); }

    Matrix matrix() const {
        if (family == TransformFamily::affine) return a;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double f = reflection ? -1.0 : 1.0;
        Matrix m(2, 2);
        m(0, 0) = c;
        m(0, 1) = -s * f;
        m(1, 0) = s;
        m(1, 1) = c * f;
        return m;
    }

    std::vector<double> offset() const {
        return family == TransformFamily::affine ? b : std::vector<double>(2, 0.0);
    }

    double condition_number() const {
        if (family == TransformFamily::orthogonal_2d) return 1.0;
        auto inv = detail::invert(a);
        if (!inv) return std::numeric_limits<double>::infinity();
        return detail::norm1(a) * detail::norm1(*inv);
    }

    void validate() const {
        if (family == TransformFamily::orthogonal_2d) {
            if (!std::isfinite(angle)) throw ValidationError("transform angle must be finite");
            return;
        }
        if (a.rows() == 0 || a.rows() != a.cols()) throw ValidationError("affine matrix must be square and nonempty");
        if (b.size() != a.rows()) throw ValidationError("affine offset length must match the matrix");
        if (!all_finite(a.data()) || !all_finite(b)) throw ValidationError("affine parameters must be finite");
        if (!(condition_number() < kMaxCondition)) throw ValidationError("affine transform is not invertible");
    }

    Transform inverse() const {
        if (family == TransformFamily::orthogonal_2d) {
            // A reflection is its own inverse.
            return reflection ? *this : orthogonal(-angle, false);
        }
        validate();
        Matrix inv = *detail::invert(a);
        std::vector<double> off(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) off[i] -= inv(i, j) * b[j];
        }
        return affine(std::move(inv), std::move(off));
    }
};

inline Matrix apply_transform(const Transform& t, const Matrix& features) {
    t.validate();
    if (features.cols() != t.dim()) {
        throw ValidationError("transform dimension " + std::to_string(t.dim()) + " does not match features (" +
                              std::to_string(features.cols()) + ")");
    }
    const Matrix m = t.matrix();
    const auto off = t.offset();
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        auto x = features.row(r);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double s = off[i];
            for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
            out(r, i) = s;
        }
    }
    return out;
}

inline void to_json(nlohmann::json& j, const Transform& t) {
    j["family"] = to_string(t.family);
    if (t.family == TransformFamily::orthogonal_2d) {
        j["params"] = {{"angle_deg", degrees(t.angle)}, {"reflection", t.reflection}};
    } else {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < t.a.rows(); ++i) rows.emplace_back(t.a.row(i).begin(), t.a.row(i).end());
        j["params"] = {{"A", rows}, {"b", t.b}};
    }
}

inline void from_json(const nlohmann::json& j, Transform& t) {
    const auto family = parse_transform_family(j.at("family").get<std::string>());
    const auto& p = j.at("params");
    if (family == TransformFamily::orthogonal_2d) {
        t = Transform::orthogonal(radians(p.at("angle_deg").get<double>()), p.value("reflection", false));
    } else {
        t = Transform::affine(Matrix::from_rows(p.at("A").get<std::vector<std::vector<double>>>()),
                              p.at("b").get<std::vector<double>>());
    }
}

namespace detail {

inline void check_matchable(const QuantileModel& m0, const QuantileModel& m1) {
    if (m0.dim != m1.dim) throw ValidationError("models differ in feature dimension");
    if (m0.classes.size() != m1.classes.size()) throw ValidationError("models differ in class count");
    if (m0.grid.dense != m1.grid.dense) throw ValidationError("models must share the dense tau grid");
}

}  // namespace detail

/// Mean over samples, classes and dense tau of
/// |Q_t0(inv(x), tau) - Q_t1(x, tau)| for x in `samples_t1`.
inline double matching_objective(const QuantileModel& model_t0, const QuantileModel& model_t1,
                                 const Transform& inv_transform, const Matrix& samples_t1) {
    detail::check_matchable(model_t0, model_t1);
    check_dim(model_t1, samples_t1);
    if (samples_t1.rows() == 0) throw ValidationError("matching needs at least one sample");
    const Matrix mapped = apply_transform(inv_transform, samples_t1);
    const std::size_t k = model_t0.classes.size();
    const std::size_t taus = model_t0.num_taus();
    double total = 0.0;
    for (std::size_t i = 0; i < samples_t1.rows(); ++i) {
        double row = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t t = 0; t < taus; ++t) {
                row += std::abs(model_t0.logit(c, t, mapped.row(i)) - model_t1.logit(c, t, samples_t1.row(i)));
            }
        }
        total += row;
    }
    return total / static_cast<double>(samples_t1.rows() * k * taus);
}

struct SearchConfig {
    double angle_step_deg = 1.0;
    double refine_tol_deg = 1e-4;
    std::size_t refine_candidates = 4;  // grid minima refined per reflection branch
    double tie_tolerance = 1e-6;
    std::size_t affine_starts = 4;
    std::size_t affine_max_sweeps = 200;
    double affine_initial_step = 0.25;
    double affine_min_step = 1e-6;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(angle_step_deg > 0.0 && angle_step_deg <= 90.0)) throw ConfigError("angle_step_deg must lie in (0, 90]");
        if (!(refine_tol_deg > 0.0)) throw ConfigError("refine_tol_deg must be > 0");
        if (refine_candidates == 0) throw ConfigError("refine_candidates must be >= 1");
        if (!(tie_tolerance >= 0.0)) throw ConfigError("tie_tolerance must be >= 0");
        if (affine_starts == 0) throw ConfigError("affine_starts must be >= 1");
        if (!(affine_initial_step > affine_min_step && affine_min_step > 0.0)) {
            throw ConfigError("affine steps must satisfy initial > min > 0");
        }
    }
};

struct TransformCandidate {
    Transform inverse;  // the estimate of the inverse map, applied to t1 samples
    double objective = 0.0;
};

struct TransformEstimate {
    Transform transform;  // estimated forward map t0 -> t1
    Transform inverse;
    double objective = 0.0;
    // Every refined family member within tie_tolerance of the optimum,
    // including the optimum itself.
    std::vector<TransformCandidate> near_ties;
    QuantileModel model_t1;

    bool ambiguous() const { return near_ties.size() > 1; }
};

namespace detail {

inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

inline std::vector<TransformCandidate> search_orthogonal(const std::function<double(const Transform&)>& objective,
                                                         const SearchConfig& cfg) {
    const auto steps = static_cast<std::size_t>(std::ceil(360.0 / cfg.angle_step_deg));
    std::vector<TransformCandidate> refined;
    for (bool reflect : {false, true}) {
        std::vector<double> grid(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            grid[s] = objective(Transform::orthogonal(radians(static_cast<double>(s) * cfg.angle_step_deg), reflect));
        }
        // Circular local minima, best first.
        std::vector<std::size_t> minima;
        for (std::size_t s = 0; s < steps; ++s) {
            const double prev = grid[(s + steps - 1) % steps];
            const double next = grid[(s + 1) % steps];
            if (grid[s] <= prev && grid[s] <= next) minima.push_back(s);
        }
        std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
        if (minima.size() > cfg.refine_candidates) minima.resize(cfg.refine_candidates);
        for (std::size_t s : minima) {
            const double center = static_cast<double>(s) * cfg.angle_step_deg;
            auto f = [&](double deg) { return objective(Transform::orthogonal(radians(deg), reflect)); };
            const double best = golden_section(f, center - cfg.angle_step_deg, center + cfg.angle_step_deg,
                                               cfg.refine_tol_deg);
            double deg = best;
            double val = f(best);
            if (grid[s] < val) {
                deg = center;
                val = grid[s];
            }
            refined.push_back({Transform::orthogonal(radians(wrap_degrees(deg)), reflect), val});
        }
    }
    return refined;
}

inline std::vector<TransformCandidate> search_affine(const std::function<double(const Transform&)>& objective,
                                                     std::size_t d, const SearchConfig& cfg) {
    auto eval = [&](const std::vector<double>& p) {
        Matrix a(d, d, std::vector<double>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d * d)));
        std::vector<double> b(p.begin() + static_cast<std::ptrdiff_t>(d * d), p.end());
        try {
            return objective(Transform::affine(std::move(a), std::move(b)));
        } catch (const ValidationError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto to_transform = [&](const std::vector<double>& p) {
        Matrix a(d, d, std::vector<double>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d * d)));
        return Transform::affine(std::move(a), std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(d * d), p.end()));
    };

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 0.5);
    std::vector<TransformCandidate> out;
    for (std::size_t start = 0; start < cfg.affine_starts; ++start) {
        std::vector<double> p(d * d + d, 0.0);
        for (std::size_t i = 0; i < d; ++i) p[i * d + i] = 1.0;
        // The first start is the identity; the rest are seeded perturbations.
        if (start > 0) {
            for (double& v : p) v += gauss(rng);
        }
        double best = eval(p);
        if (!std::isfinite(best)) continue;
        double step = cfg.affine_initial_step;
        for (std::size_t sweep = 0; sweep < cfg.affine_max_sweeps && step >= cfg.affine_min_step; ++sweep) {
            bool improved = false;
            for (std::size_t j = 0; j < p.size(); ++j) {
                for (double dir : {1.0, -1.0}) {
                    const double keep = p[j];
                    p[j] = keep + dir * step;
                    const double v = eval(p);
                    if (v < best) {
                        best = v;
                        improved = true;
                        break;
                    }
                    p[j] = keep;
                }
            }
            if (!improved) step *= 0.5;
        }
        out.push_back({to_transform(p), best});
    }
    if (out.empty()) throw NumericalError("affine search found no invertible start");
    return out;
}

}  // namespace detail

/// Fits the t1 quantile model from labelled `data_t1` with the same grid and
/// fit settings as `model_t0`, then searches the family for the inverse map
/// minimizing the matching objective.
inline TransformEstimate estimate_transform(TransformFamily family, const QuantileModel& model_t0,
                                            const Dataset& data_t1, const FitConfig& fit,
                                            const SearchConfig& search = {}) {
    search.validate();
    data_t1.validate();
    if (family == TransformFamily::orthogonal_2d && data_t1.dim() != 2) {
        throw ConfigError("orthogonal-2d family needs 2-D features (got " + std::to_string(data_t1.dim()) + ")");
    }
    if (family == TransformFamily::affine && (data_t1.dim() == 0 || data_t1.dim() > 10)) {
        throw ConfigError("affine family supports 1 <= d <= 10 (got " + std::to_string(data_t1.dim()) + ")");
    }
    if (data_t1.dim() != model_t0.dim) throw ValidationError("t1 data dimension does not match the t0 model");
    if (data_t1.num_classes != static_cast<int>(model_t0.num_classes)) {
        throw ValidationError("t1 data class count does not match the t0 model");
    }

    TransformEstimate est;
    QuantileFitOptions opt;
    opt.fit = fit;
    est.model_t1 = fit_quantile_model(data_t1, fit_base_classifiers(data_t1, fit), model_t0.grid, opt);

    auto objective = [&](const Transform& inv) {
        return matching_objective(model_t0, est.model_t1, inv, data_t1.features);
    };
    auto candidates = family == TransformFamily::orthogonal_2d
                          ? detail::search_orthogonal(objective, search)
                          : detail::search_affine(objective, data_t1.dim(), search);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.objective < b.objective; });
    est.inverse = candidates.front().inverse;
    est.objective = candidates.front().objective;
    est.transform = est.inverse.inverse();
    for (const auto& c : candidates) {
        if (c.objective <= est.objective + search.tie_tolerance) est.near_ties.push_back(c);
    }
    return est;
}

/// Direction (radians) of the mean unit normal of the last class's anchor
/// classifiers. When the anchors are parallel, reflecting about this axis
/// leaves the model's logits unchanged.
inline double symmetry_axis(const QuantileModel& model) {
    if (model.dim != 2) throw ValidationError("symmetry axis needs a 2-D model");
    double wx = 0.0;
    double wy = 0.0;
    for (const auto& a : model.classes.back().anchors) {
        const double n = std::hypot(a.weights[0], a.weights[1]);
        if (n == 0.0) continue;
        wx += a.weights[0] / n;
        wy += a.weights[1] / n;
    }
    return std::atan2(wy, wx);
}

/// Rotation angle (degrees, [0, 360)) of an estimated inverse map, with a
/// reflection first composed with the t0 model's symmetry reflection.
inline double equivalent_rotation_deg(const Transform& inverse, const QuantileModel& model_t0) {
    if (inverse.family != TransformFamily::orthogonal_2d) throw ValidationError("not an orthogonal-2d transform");
    if (!inverse.reflection) return wrap_degrees(degrees(inverse.angle));
    // Reflection about axis phi is R(2 phi) diag(1, -1); two reflections compose to a rotation.
    return wrap_degrees(degrees(2.0 * symmetry_axis(model_t0) - inverse.angle));
}

/// Per-class feature means (k x d).
inline Matrix class_means(const Dataset& data) {
    Matrix out(static_cast<std::size_t>(data.num_classes), data.dim());
    std::vector<double> count(static_cast<std::size_t>(data.num_classes), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        count[c] += 1.0;
        for (std::size_t j = 0; j < data.dim(); ++j) out(c, j) += data.features(i, j);
    }
    for (std::size_t c = 0; c < count.size(); ++c) {
        for (std::size_t j = 0; j < data.dim(); ++j) out(c, j) = count[c] > 0 ? out(c, j) / count[c] : 0.0;
    }
    return out;
}

}  // namespace quantrep

#endif
