#ifndef QUANTREP_LOSSES_HPP
#define QUANTREP_LOSSES_HPP

#include "core.hpp"

#include <span>
#include <vector>

namespace quantrep {

namespace detail {

inline void check_open_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ValidationError("tau must lie in (0, 1), got " + std::to_string(tau));
    }
}

}  // namespace detail

/// Pinball loss: tau*(y - y_hat) if the residual is positive, else (1-tau)*(y_hat - y).
inline double check_loss(double y_hat, double y, double tau) {
    detail::check_open_tau(tau);
    const double r = y - y_hat;
    return r > 0.0 ? tau * r : (1.0 - tau) * (-r);
}

/// Pinball loss specialised to y in {0, 1} and y_hat in [0, 1].
inline double binary_check_loss(double y_hat, int y, double tau) {
    detail::check_open_tau(tau);
    if (!(y_hat >= 0.0 && y_hat <= 1.0)) {
        throw ValidationError("binary check loss needs y_hat in [0, 1]");
    }
    if (y != 0 && y != 1) {
        throw ValidationError("binary check loss needs y in {0, 1}");
    }
    return y == 1 ? tau * (1.0 - y_hat) : (1.0 - tau) * y_hat;
}

/// rho(y_hat, y; tau) - rho(1 - tau, y; 1 - y_hat). Identically zero for
/// binary targets: a probability-y_hat prediction at quantile tau is the same
/// loss as a probability-(1 - tau) prediction at quantile 1 - y_hat.
inline double duality_residual(double y_hat, int y, double tau) {
    detail::check_open_tau(tau);
    if (!(y_hat > 0.0 && y_hat < 1.0)) {
        throw ValidationError("duality residual needs y_hat in (0, 1)");
    }
    return binary_check_loss(y_hat, y, tau) - binary_check_loss(1.0 - tau, y, 1.0 - y_hat);
}

enum class PredictionMode {
    probability,  // predictions are probabilities in [0, 1]
    indicator,    // predictions are logits; scored as I[logit >= 0]
};

/// Mean over taus and samples of rho(pred(i, tau), y_i; tau).
/// `pred` is called as pred(sample_index, tau_index).
template <typename Predict>
double simultaneous_loss(Predict&& pred, const std::vector<int>& labels01, std::span<const double> taus,
                         PredictionMode mode) {
    if (taus.empty()) throw ValidationError("simultaneous loss needs a nonempty tau grid");
    if (labels01.empty()) throw ValidationError("simultaneous loss needs at least one sample");
    double total = 0.0;
    for (std::size_t t = 0; t < taus.size(); ++t) {
        for (std::size_t i = 0; i < labels01.size(); ++i) {
            const double v = pred(i, t);
            double y_hat = 0.0;
            if (mode == PredictionMode::indicator) {
                y_hat = v >= 0.0 ? 1.0 : 0.0;
            } else {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw ValidationError("probability prediction outside [0, 1]");
                }
                y_hat = v;
            }
            total += binary_check_loss(y_hat, labels01[i], taus[t]);
        }
    }
    return total / (static_cast<double>(taus.size()) * static_cast<double>(labels01.size()));
}

}  // namespace quantrep

#endif
