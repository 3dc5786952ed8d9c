#include "quantrep/linear.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace quantrep;

namespace {

struct Problem {
    Matrix x;
    std::vector<int> y;
    std::vector<double> w;
};

Problem random_problem(std::uint64_t seed, std::size_t n = 60, std::size_t d = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    Problem p{Matrix(n, d), std::vector<int>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double z = 0.3;
        for (std::size_t j = 0; j < d; ++j) {
            p.x(i, j) = g(rng);
            z += (j % 2 ? -1.0 : 1.0) * p.x(i, j);
        }
        p.y[i] = z + g(rng) > 0 ? 1 : 0;
        p.w[i] = u(rng);
    }
    return p;
}

double training_mae(const LinearClassifier& c, const Matrix& x, const std::vector<int>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - sigmoid(c.decision(x.row(i))));
    return s / static_cast<double>(y.size());
}

}  // namespace

TEST(WeightedLogistic, SeparableOneDimensional) {
    Matrix x = Matrix::from_rows({{-1.0}, {1.0}});
    FitConfig cfg;
    cfg.l2_reg = 0.1;
    auto fit = fit_logistic(x, {0, 1}, cfg);
    EXPECT_GT(fit.classifier.weights[0], 0.0);
    EXPECT_LT(fit.classifier.decision(x.row(0)), 0.0);
    EXPECT_GT(fit.classifier.decision(x.row(1)), 0.0);
    EXPECT_TRUE(fit.converged);
}

TEST(WeightedLogistic, DoubledWeightsWithDoubledRegularization) {
    auto p = random_problem(1);
    FitConfig cfg;
    cfg.l2_reg = 0.5;
    auto a = fit_weighted_logistic(p.x, p.y, p.w, cfg).classifier;
    std::vector<double> w2(p.w);
    for (auto& v : w2) v *= 2.0;
    cfg.l2_reg = 1.0;
    auto b = fit_weighted_logistic(p.x, p.y, w2, cfg).classifier;
    for (std::size_t j = 0; j < a.dim(); ++j) EXPECT_NEAR(a.weights[j], b.weights[j], 1e-8);
    EXPECT_NEAR(a.bias, b.bias, 1e-8);
}

TEST(WeightedLogistic, DoubleWeightEqualsDuplicateSample) {
    auto p = random_problem(2, 40, 2);
    FitConfig cfg;
    std::vector<double> ones(p.y.size(), 1.0);
    ones[7] = 2.0;
    auto a = fit_weighted_logistic(p.x, p.y, ones, cfg).classifier;
    Matrix xd = p.x;
    xd.append_row(p.x.row(7));
    std::vector<int> yd(p.y);
    yd.push_back(p.y[7]);
    auto b = fit_logistic(xd, yd, cfg).classifier;
    for (std::size_t j = 0; j < a.dim(); ++j) EXPECT_NEAR(a.weights[j], b.weights[j], 1e-8);
    EXPECT_NEAR(a.bias, b.bias, 1e-8);
}

TEST(WeightedLogistic, SingleClassGivesDegenerateConstant) {
    Matrix x = Matrix::from_rows({{0.0, 1.0}, {2.0, 3.0}});
    auto pos = fit_logistic(x, {1, 1}, {});
    EXPECT_TRUE(pos.degenerate);
    EXPECT_EQ(pos.classifier.weights, (std::vector<double>{0.0, 0.0}));
    EXPECT_GT(pos.classifier.bias, 10.0);
    auto neg = fit_logistic(x, {0, 0}, {});
    EXPECT_LT(neg.classifier.bias, -10.0);
}

TEST(WeightedLogistic, NonFiniteFeatureIsRejected) {
    Matrix x = Matrix::from_rows({{0.0}, {std::nan("")}});
    EXPECT_THROW(fit_logistic(x, {0, 1}, {}), ValidationError);
}

TEST(WeightedLogistic, NonPositiveWeightIsRejected) {
    Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    EXPECT_THROW(fit_weighted_logistic(x, {0, 1}, {1.0, 0.0}, {}), ValidationError);
}

TEST(WeightedLogistic, ConfigIsValidated) {
    FitConfig cfg;
    cfg.tol = 0.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = {};
    cfg.max_iter = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(WeightedLogistic, GradientMatchesFiniteDifferences) {
    auto p = random_problem(3);
    LogisticObjective obj(p.x, p.y, p.w, 0.3);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> theta(obj.num_params());
        for (auto& v : theta) v = g(rng);
        auto grad = obj.gradient(theta);
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
            auto tp = theta;
            auto tm = theta;
            tp[j] += h;
            tm[j] -= h;
            const double fd = (obj.value(tp) - obj.value(tm)) / (2.0 * h);
            EXPECT_LE(std::abs(fd - grad[j]), 1e-5 * std::max(1.0, std::abs(grad[j])));
        }
    }
}

TEST(WeightedLogistic, ObjectiveIsMidpointConvex) {
    auto p = random_problem(5);
    LogisticObjective obj(p.x, p.y, p.w, 0.1);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(obj.num_params());
        std::vector<double> b(obj.num_params());
        std::vector<double> mid(obj.num_params());
        for (std::size_t j = 0; j < a.size(); ++j) {
            a[j] = g(rng);
            b[j] = g(rng);
            mid[j] = 0.5 * (a[j] + b[j]);
        }
        EXPECT_LE(obj.value(mid), 0.5 * (obj.value(a) + obj.value(b)) + 1e-10);
    }
}

TEST(WeightedLogistic, SameSeedSameResult) {
    auto p = random_problem(7);
    FitConfig cfg;
    cfg.seed = 9;
    auto a = fit_weighted_logistic(p.x, p.y, p.w, cfg);
    auto b = fit_weighted_logistic(p.x, p.y, p.w, cfg);
    EXPECT_EQ(a.classifier, b.classifier);
}

TEST(SigmoidMae, SeparatedDataFitsClosely) {
    Matrix x = Matrix::from_rows({{-2.0}, {-1.5}, {-0.5}, {0.5}, {1.0}, {2.5}});
    std::vector<int> y{0, 0, 0, 1, 1, 1};
    FitConfig cfg;
    cfg.l2_reg = 0.0;
    cfg.max_iter = 5000;
    auto fit = fit_sigmoid_mae(x, y, cfg);
    EXPECT_LT(training_mae(fit.classifier, x, y), 0.01);
}

TEST(SigmoidMae, AllOnesDrivesSigmoidToOne) {
    Matrix x = Matrix::from_rows({{-1.0}, {0.0}, {3.0}});
    auto fit = fit_sigmoid_mae(x, {1, 1, 1}, {});
    EXPECT_LT(training_mae(fit.classifier, x, {1, 1, 1}), 0.01);
}

TEST(SigmoidMae, FlippedLabelsWithNegatedCoefficients) {
    auto p = random_problem(8, 30, 2);
    std::vector<int> flipped(p.y);
    for (auto& v : flipped) v = 1 - v;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> theta{g(rng), g(rng), g(rng)};
        std::vector<double> neg{-theta[0], -theta[1], -theta[2]};
        EXPECT_NEAR(sigmoid_mae_objective(p.x, p.y, 0.0, theta), sigmoid_mae_objective(p.x, flipped, 0.0, neg),
                    1e-12);
    }
}

TEST(SigmoidMae, GradientMatchesFiniteDifferences) {
    auto p = random_problem(9, 25, 2);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> theta{g(rng), g(rng), g(rng)};
        auto grad = sigmoid_mae_gradient(p.x, p.y, 0.2, theta);
        for (std::size_t j = 0; j < theta.size(); ++j) {
            auto tp = theta;
            auto tm = theta;
            tp[j] += 1e-6;
            tm[j] -= 1e-6;
            const double fd =
                (sigmoid_mae_objective(p.x, p.y, 0.2, tp) - sigmoid_mae_objective(p.x, p.y, 0.2, tm)) / 2e-6;
            EXPECT_NEAR(fd, grad[j], 1e-5 * std::max(1.0, std::abs(grad[j])));
        }
    }
}

TEST(Decision, ConstantClassifier) {
    LinearClassifier c{{0.0, 0.0}, 0.3, false};
    auto z = decision(c, Matrix::from_rows({{1.0, 2.0}, {-5.0, 7.0}}));
    EXPECT_EQ(z, (std::vector<double>{0.3, 0.3}));
    EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(Decision, AffineInInput) {
    auto c = normalize_l2({{0.4, -1.2}, 0.7, false});
    const std::array<double, 2> x{0.3, 2.0};
    const std::array<double, 2> x2{0.6, 4.0};
    EXPECT_NEAR(c.decision(x2) - c.decision(x), dot(c.weights, x), 1e-15);
}

TEST(Decision, DimensionMismatchIsRejected) {
    LinearClassifier c{{1.0, 2.0}, 0.0, false};
    EXPECT_THROW(decision(c, Matrix(3, 3)), ValidationError);
}

TEST(Normalize, ThreeFourFive) {
    auto c = normalize_l2({{3.0, 4.0}, 0.0, false});
    EXPECT_DOUBLE_EQ(c.weights[0], 0.6);
    EXPECT_DOUBLE_EQ(c.weights[1], 0.8);
    EXPECT_EQ(c.bias, 0.0);
    EXPECT_TRUE(c.normalized);
}

TEST(Normalize, IdempotentAndSignPreserving) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        LinearClassifier c{{g(rng), g(rng), g(rng)}, g(rng), false};
        auto n1 = normalize_l2(c);
        auto n2 = normalize_l2(n1);
        EXPECT_NEAR(norm2(n1.coefficients()), 1.0, 1e-12);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(n1.weights[j], n2.weights[j], 1e-15);
        EXPECT_NEAR(n1.bias, n2.bias, 1e-15);
        for (int s = 0; s < 10; ++s) {
            const std::array<double, 3> x{g(rng), g(rng), g(rng)};
            EXPECT_EQ(c.decision(x) >= 0.0, n1.decision(x) >= 0.0);
        }
    }
}

TEST(Normalize, AllZeroIsDegenerate) {
    EXPECT_THROW(normalize_l2({{0.0, 0.0}, 0.0, false}), DegenerateClassifierError);
}

TEST(Normalize, ArgmaxChangesOnlyWithUnequalNorms) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    std::size_t changed = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<LinearClassifier> cls;
        const bool equal_norms = trial % 2 == 0;
        for (int c = 0; c < 3; ++c) {
            auto base = normalize_l2({{g(rng), g(rng)}, g(rng), false});
            const double s = equal_norms ? 2.0 : scale(rng);
            for (auto& w : base.weights) w *= s;
            base.bias *= s;
            base.normalized = false;
            cls.push_back(base);
        }
        const std::array<double, 2> x{g(rng), g(rng)};
        auto argmax = [&](bool norm) {
            int best = 0;
            double bz = -1e300;
            for (int c = 0; c < 3; ++c) {
                const double z = norm ? normalize_l2(cls[c]).decision(x) : cls[c].decision(x);
                if (z > bz) {
                    bz = z;
                    best = c;
                }
            }
            return best;
        };
        if (argmax(false) != argmax(true)) {
            EXPECT_FALSE(equal_norms);
            ++changed;
        }
    }
    RecordProperty("argmax_changes_unequal_norms", static_cast<int>(changed));
}

TEST(ClassifierJson, RoundTrip) {
    LinearClassifier c{{0.25, -1.0 / 3.0}, 1e-300, true};
    nlohmann::json j = c;
    EXPECT_EQ(j.get<LinearClassifier>(), c);
}
