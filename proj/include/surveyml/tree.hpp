#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include "surveyml/errors.hpp"
#include "surveyml/matrix.hpp"
#include "surveyml/rng.hpp"

namespace surveyml {

struct TreeConfig {
    int max_depth = 12;
    int min_samples_leaf = 5;
    // Features considered per split; 0 means all. Sampling consumes the rng
    // stream only when 0 < mtry < p.
    int mtry = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::vector<double> probs;  // leaf class distribution

    bool is_leaf() const { return feature < 0; }

    int depth() const {
        if (is_leaf()) return 0;
        return 1 + std::max(left->depth(), right->depth());
    }

    TreeNode clone() const {
        TreeNode out;
        out.feature = feature;
        out.threshold = threshold;
        out.probs = probs;
        if (left) out.left = std::make_unique<TreeNode>(left->clone());
        if (right) out.right = std::make_unique<TreeNode>(right->clone());
        return out;
    }
};

namespace detail {

inline double gini(const std::vector<long long>& counts, long long total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (long long c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// CART greedy split: candidate thresholds are midpoints between consecutive
// distinct sorted values; equal-gain ties resolve to (lower feature index,
// lower threshold).
inline SplitChoice best_split(const Matrix& X, const std::vector<int>& y,
                              const std::vector<std::size_t>& rows, int n_classes,
                              const std::vector<int>& features, int min_leaf) {
    SplitChoice best;
    long long n = static_cast<long long>(rows.size());
    std::vector<long long> total_counts(n_classes, 0);
    for (std::size_t r : rows) ++total_counts[y[r]];
    double parent = gini(total_counts, n);

    std::vector<std::size_t> order;
    for (int f : features) {
        order = rows;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double va = X(a, f), vb = X(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
        std::vector<long long> left_counts(n_classes, 0);
        long long n_left = 0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            ++left_counts[y[order[i]]];
            ++n_left;
            double v = X(order[i], f), vnext = X(order[i + 1], f);
            if (v == vnext) continue;
            long long n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            std::vector<long long> right_counts(n_classes);
            for (int c = 0; c < n_classes; ++c) right_counts[c] = total_counts[c] - left_counts[c];
            double child = (static_cast<double>(n_left) * gini(left_counts, n_left) +
                            static_cast<double>(n_right) * gini(right_counts, n_right)) /
                           static_cast<double>(n);
            double gain = parent - child;
            double thr = v + 0.5 * (vnext - v);
            if (gain > best.gain + 1e-12 ||
                (best.found && std::abs(gain - best.gain) <= 1e-12 &&
                 (f < best.feature || (f == best.feature && thr < best.threshold)))) {
                best.found = true;
                best.feature = f;
                best.threshold = thr;
                best.gain = gain;
            }
        }
    }
    if (best.found && best.gain <= 1e-12) best.found = false;
    return best;
}

inline TreeNode make_leaf(const std::vector<int>& y, const std::vector<std::size_t>& rows,
                          int n_classes) {
    TreeNode leaf;
    leaf.probs.assign(n_classes, 0.0);
    for (std::size_t r : rows) leaf.probs[y[r]] += 1.0;
    for (double& p : leaf.probs) p /= static_cast<double>(rows.size());
    return leaf;
}

inline TreeNode grow(const Matrix& X, const std::vector<int>& y,
                     std::vector<std::size_t>& rows, int n_classes, const TreeConfig& cfg,
                     int depth, Rng& rng) {
    bool pure = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (y[rows[i]] != y[rows[0]]) {
            pure = false;
            break;
        }
    if (pure || depth >= cfg.max_depth ||
        static_cast<long long>(rows.size()) < 2LL * cfg.min_samples_leaf)
        return make_leaf(y, rows, n_classes);

    int p = static_cast<int>(X.cols);
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);
    if (cfg.mtry > 0 && cfg.mtry < p) {
        // Partial Fisher-Yates: first mtry entries are a sample without
        // replacement; re-sorted so candidate order stays index-ascending.
        for (int i = 0; i < cfg.mtry; ++i) {
            int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(p - i)));
            std::swap(features[i], features[j]);
        }
        features.resize(cfg.mtry);
        std::sort(features.begin(), features.end());
    }

    auto split = best_split(X, y, rows, n_classes, features, cfg.min_samples_leaf);
    if (!split.found) return make_leaf(y, rows, n_classes);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        if (X(r, split.feature) <= split.threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = std::make_unique<TreeNode>(
        grow(X, y, left_rows, n_classes, cfg, depth + 1, rng));
    node.right = std::make_unique<TreeNode>(
        grow(X, y, right_rows, n_classes, cfg, depth + 1, rng));
    return node;
}

}  // namespace detail

inline TreeNode train_tree(const Matrix& X, const std::vector<int>& y, int n_classes,
                           const TreeConfig& cfg, Rng& rng) {
    if (X.rows == 0) throw DataError("train_tree: empty input");
    if (y.size() != X.rows) throw DataError("train_tree: label/row mismatch");
    std::vector<std::size_t> rows(X.rows);
    std::iota(rows.begin(), rows.end(), 0);
    return detail::grow(X, y, rows, n_classes, cfg, 0, rng);
}

inline const std::vector<double>& tree_predict_row(const TreeNode& root,
                                                   std::span<const double> x) {
    const TreeNode* node = &root;
    while (!node->is_leaf())
        node = (x[node->feature] <= node->threshold) ? node->left.get() : node->right.get();
    return node->probs;
}

inline Matrix predict_tree(const TreeNode& root, const Matrix& X, int n_classes) {
    Matrix out(X.rows, n_classes);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto& probs = tree_predict_row(root, X.row(i));
        for (int c = 0; c < n_classes; ++c) out(i, c) = probs[c];
    }
    return out;
}

}  // namespace surveyml
