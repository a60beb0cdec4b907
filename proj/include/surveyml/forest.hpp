#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "surveyml/matrix.hpp"
#include "surveyml/parallel.hpp"
#include "surveyml/rng.hpp"
#include "surveyml/tree.hpp"

namespace surveyml {

struct ForestConfig {
    int n_trees = 100;
    // Features sampled per split; -1 means ceil(sqrt(p)), 0 means all.
    int mtry = -1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    TreeConfig tree;
};

struct Forest {
    std::vector<TreeNode> trees;
    std::vector<std::uint64_t> tree_seeds;
    int n_classes = 0;
    int mtry_used = 0;
};

// Bagged CART ensemble. Each tree owns a pre-derived seed, so training is
// schedule-independent under any thread count.
inline Forest train_forest(const Matrix& X, const std::vector<int>& y, int n_classes,
                           const ForestConfig& cfg, unsigned threads = 1) {
    Forest forest;
    forest.n_classes = n_classes;
    int p = static_cast<int>(X.cols);
    forest.mtry_used = cfg.mtry < 0
                           ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))))
                           : cfg.mtry;
    forest.trees.resize(cfg.n_trees);
    forest.tree_seeds.resize(cfg.n_trees);
    for (int t = 0; t < cfg.n_trees; ++t)
        forest.tree_seeds[t] = derive_seed(cfg.seed, {static_cast<std::uint64_t>(t)});

    TreeConfig tree_cfg = cfg.tree;
    tree_cfg.mtry = forest.mtry_used;
    parallel_for(static_cast<std::size_t>(cfg.n_trees), threads, [&](std::size_t t) {
        Rng rng(forest.tree_seeds[t]);
        if (cfg.bootstrap) {
            std::size_t n = X.rows;
            std::vector<std::size_t> sample(n);
            for (std::size_t i = 0; i < n; ++i)
                sample[i] = static_cast<std::size_t>(rng.bounded(n));
            Matrix Xb = X.select_rows(sample);
            std::vector<int> yb(n);
            for (std::size_t i = 0; i < n; ++i) yb[i] = y[sample[i]];
            forest.trees[t] = train_tree(Xb, yb, n_classes, tree_cfg, rng);
        } else {
            forest.trees[t] = train_tree(X, y, n_classes, tree_cfg, rng);
        }
    });
    return forest;
}

// Mean of per-tree class-probability vectors.
inline Matrix predict_forest(const Forest& forest, const Matrix& X) {
    Matrix out(X.rows, forest.n_classes);
    for (const auto& tree : forest.trees) {
        for (std::size_t i = 0; i < X.rows; ++i) {
            const auto& probs = tree_predict_row(tree, X.row(i));
            for (int c = 0; c < forest.n_classes; ++c) out(i, c) += probs[c];
        }
    }
    double inv = 1.0 / static_cast<double>(forest.trees.size());
    for (double& v : out.data) v *= inv;
    return out;
}

}  // namespace surveyml
