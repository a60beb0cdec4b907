#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "surveyml/errors.hpp"
#include "surveyml/matrix.hpp"

namespace surveyml {

struct LogisticConfig {
    double l2_lambda = 1e-4;  // bias unpenalized
    int max_iters = 1000;
    double tol = 1e-6;  // infinity-norm of the gradient
};

// Binary logistic model. Standardization statistics are captured from the
// training partition and re-applied at predict time.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_sd;  // 1.0 for constant features
    bool constant = false;           // degenerate single-class fit
    std::vector<std::string> warnings;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// Loss: mean cross-entropy + (lambda/2)*||w||^2. Gradient is returned as
// [dw_0..dw_{p-1}, db]. Operates on X as given; any standardization is the
// caller's concern.
inline std::pair<double, std::vector<double>> logistic_loss_grad(
    const std::vector<double>& weights, double bias, const Matrix& X,
    const std::vector<int>& y, double l2_lambda) {
    std::size_t n = X.rows, p = X.cols;
    if (weights.size() != p) throw DataError("logistic_loss_grad: weight/feature mismatch");
    if (y.size() != n) throw DataError("logistic_loss_grad: label/row mismatch");
    double loss = 0.0;
    std::vector<double> grad(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double z = bias;
        auto xi = X.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            if (!std::isfinite(xi[j])) throw DataError("logistic_loss_grad: non-finite input");
            z += weights[j] * xi[j];
        }
        double yi = static_cast<double>(y[i]);
        // log(1 + e^z) - y*z, written to avoid overflow on either side.
        loss += (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - yi * z;
        double r = sigmoid(z) - yi;
        for (std::size_t j = 0; j < p; ++j) grad[j] += r * xi[j];
        grad[p] += r;
    }
    double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    for (std::size_t j = 0; j <= p; ++j) grad[j] *= inv_n;
    for (std::size_t j = 0; j < p; ++j) {
        loss += 0.5 * l2_lambda * weights[j] * weights[j];
        grad[j] += l2_lambda * weights[j];
    }
    return {loss, grad};
}

namespace detail {

inline void standardize_stats(const Matrix& X, std::vector<double>& mean,
                              std::vector<double>& sd) {
    std::size_t n = X.rows, p = X.cols;
    mean.assign(p, 0.0);
    sd.assign(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = X.row(i);
        for (std::size_t j = 0; j < p; ++j) mean[j] += xi[j];
    }
    for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = X.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            double d = xi[j] - mean[j];
            sd[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
        if (sd[j] <= 0.0) sd[j] = 1.0;
    }
}

}  // namespace detail

// Full-batch gradient descent with backtracking line search. The accepted-step
// rule keeps the training loss non-increasing; stops on gradient tolerance or
// max_iters.
inline LinearModel train_logistic(const Matrix& X, const std::vector<int>& y,
                                  const LogisticConfig& cfg = {}) {
    std::size_t n = X.rows, p = X.cols;
    if (y.size() != n) throw DataError("train_logistic: label/row mismatch");
    LinearModel model;
    detail::standardize_stats(X, model.feature_mean, model.feature_sd);

    std::size_t n_pos = 0;
    for (int yi : y) n_pos += static_cast<std::size_t>(yi != 0);
    if (n_pos == 0 || n_pos == n) {
        // Degenerate single-class input: constant-probability model.
        double prior = std::min(1.0 - 1e-12, std::max(1e-12, static_cast<double>(n_pos) /
                                                                  static_cast<double>(n)));
        model.weights.assign(p, 0.0);
        model.bias = std::log(prior / (1.0 - prior));
        model.constant = true;
        model.warnings.push_back("train_logistic: single-class input, constant model");
        return model;
    }

    Matrix Z(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            Z(i, j) = (X(i, j) - model.feature_mean[j]) / model.feature_sd[j];

    std::vector<double> w(p, 0.0);
    double b = 0.0;
    auto [loss, grad] = logistic_loss_grad(w, b, Z, y, cfg.l2_lambda);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double gmax = 0.0, gsq = 0.0;
        for (double g : grad) {
            gmax = std::max(gmax, std::abs(g));
            gsq += g * g;
        }
        if (gmax < cfg.tol) break;
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> w2(p);
            for (std::size_t j = 0; j < p; ++j) w2[j] = w[j] - step * grad[j];
            double b2 = b - step * grad[p];
            auto [loss2, grad2] = logistic_loss_grad(w2, b2, Z, y, cfg.l2_lambda);
            if (loss2 <= loss - 1e-4 * step * gsq) {
                w = std::move(w2);
                b = b2;
                loss = loss2;
                grad = std::move(grad2);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent step at machine precision
    }
    model.weights = std::move(w);
    model.bias = b;
    return model;
}

// Positive-class probability per row.
inline std::vector<double> predict_logistic(const LinearModel& model, const Matrix& X) {
    if (X.cols != model.weights.size())
        throw DataError("predict_logistic: feature count mismatch");
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double z = model.bias;
        auto xi = X.row(i);
        for (std::size_t j = 0; j < X.cols; ++j)
            z += model.weights[j] * (xi[j] - model.feature_mean[j]) / model.feature_sd[j];
        out[i] = sigmoid(z);
    }
    return out;
}

}  // namespace surveyml
