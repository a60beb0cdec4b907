#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "surveyml/matrix.hpp"
#include "surveyml/parallel.hpp"
#include "surveyml/rng.hpp"

namespace surveyml {

// Model-agnostic prediction surface: rows of class probabilities.
using PredictFn = std::function<Matrix(const Matrix&)>;
// Metric over (probabilities, true labels); larger is better.
using MetricFn = std::function<double(const Matrix&, const std::vector<int>&)>;

// Permutation importance: mean drop in the metric when one column is shuffled.
// Each (feature, repeat) pair owns a derived seed, so results are independent
// of evaluation order.
inline std::vector<double> permutation_importance(const PredictFn& predict,
                                                  const Matrix& X,
                                                  const std::vector<int>& y,
                                                  const MetricFn& metric, int n_repeats,
                                                  std::uint64_t seed,
                                                  unsigned threads = 1) {
    double baseline = metric(predict(X), y);
    std::size_t p = X.cols;
    std::vector<double> importance(p, 0.0);
    parallel_for(p, threads, [&](std::size_t j) {
        double drop_sum = 0.0;
        for (int rep = 0; rep < n_repeats; ++rep) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(j),
                                       static_cast<std::uint64_t>(rep)}));
            std::vector<std::size_t> perm(X.rows);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            Matrix Xp = X;
            for (std::size_t r = 0; r < X.rows; ++r) Xp(r, j) = X(perm[r], j);
            drop_sum += baseline - metric(predict(Xp), y);
        }
        importance[j] = drop_sum / static_cast<double>(n_repeats);
    });
    return importance;
}

struct PartialDependence {
    std::vector<double> grid;
    Matrix mean_probs;  // |grid| x n_classes
};

// PD(v) = mean over rows of the prediction with column j clamped to v.
inline PartialDependence partial_dependence(const PredictFn& predict, const Matrix& X,
                                            std::size_t j,
                                            const std::vector<double>& grid) {
    PartialDependence pd;
    pd.grid = grid;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        Matrix Xg = X;
        for (std::size_t r = 0; r < X.rows; ++r) Xg(r, j) = grid[g];
        Matrix probs = predict(Xg);
        if (g == 0) pd.mean_probs = Matrix(grid.size(), probs.cols);
        for (std::size_t r = 0; r < probs.rows; ++r)
            for (std::size_t c = 0; c < probs.cols; ++c)
                pd.mean_probs(g, c) += probs(r, c);
        for (std::size_t c = 0; c < probs.cols; ++c)
            pd.mean_probs(g, c) /= static_cast<double>(probs.rows);
    }
    return pd;
}

// Default PD grid: the observed distinct values of the feature. Survey items
// have small discrete domains, so this beats quantile grids here.
inline std::vector<double> default_grid(const Matrix& X, std::size_t j) {
    std::set<double> values;
    for (std::size_t r = 0; r < X.rows; ++r) values.insert(X(r, j));
    return {values.begin(), values.end()};
}

}  // namespace surveyml
