#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "surveyml/logistic.hpp"
#include "surveyml/rng.hpp"

using namespace surveyml;

TEST_CASE("logistic_loss_grad: analytic gradient matches central differences") {
    const double h = 1e-5;
    Rng rng(77);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        std::size_t n = 5 + rng.bounded(46);   // <= 50
        std::size_t p = 1 + rng.bounded(10);   // <= 10
        double lambda = inst % 3 == 0 ? 0.0 : (inst % 3 == 1 ? 1e-4 : 0.1);
        Matrix X(n, p);
        for (double& v : X.data) v = rng.normal();
        std::vector<int> y(n);
        for (auto& v : y) v = rng.uniform() < 0.5 ? 1 : 0;
        std::vector<double> w(p);
        for (double& v : w) v = 0.5 * rng.normal();
        double b = 0.5 * rng.normal();

        auto [loss, grad] = logistic_loss_grad(w, b, X, y, lambda);
        REQUIRE(std::isfinite(loss));
        for (std::size_t j = 0; j <= p; ++j) {
            auto eval = [&](double delta) {
                std::vector<double> w2 = w;
                double b2 = b;
                if (j < p)
                    w2[j] += delta;
                else
                    b2 += delta;
                return logistic_loss_grad(w2, b2, X, y, lambda).first;
            };
            double fd = (eval(h) - eval(-h)) / (2.0 * h);
            double rel = std::abs(grad[j] - fd) / std::max(1.0, std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    REQUIRE(worst < 1e-5);
}

TEST_CASE("logistic_loss_grad: zero weights on balanced data give log(2) loss") {
    Matrix X(4, 2);
    X.data = {1, 0, 0, 1, -1, 0, 0, -1};
    std::vector<int> y = {1, 1, 0, 0};
    auto [loss, grad] = logistic_loss_grad({0.0, 0.0}, 0.0, X, y, 0.0);
    REQUIRE(loss == Catch::Approx(std::log(2.0)));
    // balanced labels: bias gradient vanishes
    REQUIRE(grad[2] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("logistic_loss_grad: rejects shape mismatches and non-finite input") {
    Matrix X(2, 2);
    REQUIRE_THROWS_AS(logistic_loss_grad({0.0}, 0.0, X, {0, 1}, 0.0), DataError);
    REQUIRE_THROWS_AS(logistic_loss_grad({0.0, 0.0}, 0.0, X, {0}, 0.0), DataError);
    X(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(logistic_loss_grad({0.0, 0.0}, 0.0, X, {0, 1}, 0.0), DataError);
}

TEST_CASE("train_logistic: separates a linearly separable cloud") {
    Rng rng(5);
    std::size_t n = 200;
    Matrix X(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i % 2;
        double shift = y[i] ? 2.0 : -2.0;
        X(i, 0) = shift + 0.5 * rng.normal();
        X(i, 1) = rng.normal();
    }
    LinearModel model = train_logistic(X, y);
    REQUIRE_FALSE(model.constant);
    std::vector<double> p = predict_logistic(model, X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += (p[i] > 0.5) == (y[i] == 1);
    REQUIRE(correct >= n - 4);
    // the informative axis carries the weight
    REQUIRE(std::abs(model.weights[0]) > std::abs(model.weights[1]));
}

TEST_CASE("train_logistic: single-class input falls back to a constant model") {
    Matrix X(10, 1);
    for (std::size_t i = 0; i < 10; ++i) X(i, 0) = static_cast<double>(i);
    LinearModel model = train_logistic(X, std::vector<int>(10, 1));
    REQUIRE(model.constant);
    REQUIRE_FALSE(model.warnings.empty());
    std::vector<double> p = predict_logistic(model, X);
    for (double v : p) REQUIRE(v > 0.999);
}

TEST_CASE("train_logistic: deterministic and standardization-consistent") {
    Rng rng(31);
    Matrix X(60, 3);
    for (double& v : X.data) v = 3.0 + 10.0 * rng.uniform();  // far from standardized
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = X(i, 1) > 8.0 ? 1 : 0;
    LinearModel a = train_logistic(X, y);
    LinearModel b = train_logistic(X, y);
    REQUIRE(a.weights == b.weights);
    REQUIRE(a.bias == b.bias);
    // predictions reproduce the stored standardization by hand
    std::vector<double> p = predict_logistic(a, X);
    double z = a.bias;
    for (std::size_t j = 0; j < 3; ++j)
        z += a.weights[j] * (X(0, j) - a.feature_mean[j]) / a.feature_sd[j];
    REQUIRE(p[0] == Catch::Approx(sigmoid(z)));
}

TEST_CASE("predict_logistic: rejects feature count mismatch") {
    LinearModel model;
    model.weights = {1.0, 2.0};
    model.feature_mean = {0.0, 0.0};
    model.feature_sd = {1.0, 1.0};
    Matrix X(1, 3);
    REQUIRE_THROWS_AS(predict_logistic(model, X), DataError);
}
