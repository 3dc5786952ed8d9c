#ifndef QUANTREP_SPLINE_HPP
#define QUANTREP_SPLINE_HPP

#include "core.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace quantrep {

/// Natural cubic spline (zero second derivative at both ends) through
/// (knots[i], values[i]). Evaluation outside [knots.front(), knots.back()] is
/// rejected.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> knots, std::vector<double> values)
        : x_(std::move(knots)), y_(std::move(values)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw ValidationError("spline needs >= 2 knots with matching values");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) throw ValidationError("spline knots must be strictly increasing");
        }
        m_.assign(n, 0.0);
        if (n == 2) return;

        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < k; ++i) {
            const double lower = x_[i + 1] - x_[i];
            const double w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i-- > 0;) {
            m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
        }
    }

    double operator()(double x) const {
        constexpr double slack = 1e-12;
        if (x < x_.front() - slack || x > x_.back() + slack) {
            throw RangeError("spline evaluation at " + std::to_string(x) + " outside knot range");
        }
        std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    std::span<const double> second_derivatives() const { return m_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

/// Interpolates each column of `anchor_rows` (one row per anchor tau) onto
/// `dense_taus` with a natural cubic spline.
inline Matrix interpolate_coefficients(std::span<const double> anchor_taus, const Matrix& anchor_rows,
                                       std::span<const double> dense_taus) {
    if (anchor_taus.size() < 4) throw ValidationError("coefficient interpolation needs >= 4 anchors");
    if (anchor_rows.rows() != anchor_taus.size()) {
        throw ValidationError("anchor row count does not match anchor taus");
    }
    for (double t : dense_taus) {
        if (t < anchor_taus.front() - 1e-12 || t > anchor_taus.back() + 1e-12) {
            throw RangeError("dense tau " + std::to_string(t) + " outside anchor range (no extrapolation)");
        }
    }
    const std::vector<double> knots(anchor_taus.begin(), anchor_taus.end());
    Matrix out(dense_taus.size(), anchor_rows.cols());
    for (std::size_t c = 0; c < anchor_rows.cols(); ++c) {
        NaturalCubicSpline spline(knots, anchor_rows.column(c));
        for (std::size_t t = 0; t < dense_taus.size(); ++t) {
            out(t, c) = spline(dense_taus[t]);
        }
    }
    return out;
}

}  // namespace quantrep

#endif
