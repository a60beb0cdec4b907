#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "surveyml/forest.hpp"
#include "surveyml/rng.hpp"
#include "surveyml/tree.hpp"

using namespace surveyml;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
    Matrix X(n, p);
    for (double& v : X.data) v = static_cast<double>(rng.bounded(6));
    return X;
}

std::vector<int> labels_from(const Matrix& X, Rng& rng) {
    std::vector<int> y(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        y[i] = (X(i, 0) + X(i, 1 % X.cols) > 5.0) != (rng.uniform() < 0.1);
    return y;
}

}  // namespace

TEST_CASE("train_tree: recovers a clean threshold split") {
    Matrix X(8, 1);
    std::vector<int> y(8);
    for (std::size_t i = 0; i < 8; ++i) {
        X(i, 0) = static_cast<double>(i);
        y[i] = i >= 4;
    }
    TreeConfig cfg;
    cfg.min_samples_leaf = 1;
    Rng rng(1);
    TreeNode root = train_tree(X, y, 2, cfg, rng);
    REQUIRE_FALSE(root.is_leaf());
    REQUIRE(root.feature == 0);
    REQUIRE(root.threshold == 3.5);  // midpoint between 3 and 4
    Matrix probs = predict_tree(root, X, 2);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(probs(i, 1) == (i >= 4 ? 1.0 : 0.0));
}

TEST_CASE("train_tree: equal-gain ties pick the lower feature index") {
    // columns 1 and 0 are identical, both split perfectly
    Matrix X(8, 2);
    std::vector<int> y(8);
    for (std::size_t i = 0; i < 8; ++i) {
        X(i, 0) = static_cast<double>(i);
        X(i, 1) = static_cast<double>(i);
        y[i] = i >= 4;
    }
    TreeConfig cfg;
    cfg.min_samples_leaf = 1;
    Rng rng(1);
    TreeNode root = train_tree(X, y, 2, cfg, rng);
    REQUIRE(root.feature == 0);
}

TEST_CASE("train_tree: stopping rules") {
    Matrix X(9, 1);
    std::vector<int> y(9);
    for (std::size_t i = 0; i < 9; ++i) {
        X(i, 0) = static_cast<double>(i);
        y[i] = i >= 4;
    }
    SECTION("too few rows for two leaves") {
        TreeConfig cfg;
        cfg.min_samples_leaf = 5;  // 2*5 > 9
        Rng rng(1);
        TreeNode root = train_tree(X, y, 2, cfg, rng);
        REQUIRE(root.is_leaf());
        REQUIRE(root.probs[1] == Catch::Approx(5.0 / 9.0));
    }
    SECTION("max_depth zero returns the prior leaf") {
        TreeConfig cfg;
        cfg.max_depth = 0;
        cfg.min_samples_leaf = 1;
        Rng rng(1);
        TreeNode root = train_tree(X, y, 2, cfg, rng);
        REQUIRE(root.is_leaf());
    }
    SECTION("pure node never splits") {
        TreeConfig cfg;
        cfg.min_samples_leaf = 1;
        Rng rng(1);
        TreeNode root = train_tree(X, std::vector<int>(9, 1), 2, cfg, rng);
        REQUIRE(root.is_leaf());
        REQUIRE(root.probs[1] == 1.0);
    }
    SECTION("depth limit is respected") {
        Rng data_rng(3);
        Matrix Xr = random_matrix(300, 4, data_rng);
        std::vector<int> yr = labels_from(Xr, data_rng);
        TreeConfig cfg;
        cfg.max_depth = 3;
        cfg.min_samples_leaf = 1;
        Rng rng(1);
        TreeNode root = train_tree(Xr, yr, 2, cfg, rng);
        REQUIRE(root.depth() <= 3);
    }
}

TEST_CASE("train_tree: leaf probabilities sum to one") {
    Rng data_rng(4);
    Matrix X = random_matrix(200, 3, data_rng);
    std::vector<int> y = labels_from(X, data_rng);
    TreeConfig cfg;
    Rng rng(2);
    TreeNode root = train_tree(X, y, 2, cfg, rng);
    Matrix probs = predict_tree(root, X, 2);
    for (std::size_t i = 0; i < probs.rows; ++i)
        REQUIRE(probs(i, 0) + probs(i, 1) == Catch::Approx(1.0));
}

TEST_CASE("train_tree: rejects empty or mismatched input") {
    Matrix empty(0, 2);
    TreeConfig cfg;
    Rng rng(1);
    REQUIRE_THROWS_AS(train_tree(empty, {}, 2, cfg, rng), DataError);
    Matrix X(2, 1);
    REQUIRE_THROWS_AS(train_tree(X, {0}, 2, cfg, rng), DataError);
}

TEST_CASE("train_forest: one tree, no bootstrap, all features equals a single tree") {
    Rng data_rng(10);
    for (int fixture = 0; fixture < 5; ++fixture) {
        std::size_t n = 50 + data_rng.bounded(150);
        std::size_t p = 2 + data_rng.bounded(5);
        Matrix X = random_matrix(n, p, data_rng);
        std::vector<int> y = labels_from(X, data_rng);

        ForestConfig fc;
        fc.n_trees = 1;
        fc.bootstrap = false;
        fc.mtry = 0;  // all features
        fc.seed = 99 + fixture;
        Forest forest = train_forest(X, y, 2, fc);

        Rng tree_rng(forest.tree_seeds[0]);
        TreeConfig tc = fc.tree;
        tc.mtry = 0;
        TreeNode tree = train_tree(X, y, 2, tc, tree_rng);

        REQUIRE(predict_forest(forest, X) == predict_tree(tree, X, 2));
    }
}

TEST_CASE("train_forest: results are independent of the thread count") {
    Rng data_rng(20);
    Matrix X = random_matrix(300, 5, data_rng);
    std::vector<int> y = labels_from(X, data_rng);
    ForestConfig fc;
    fc.n_trees = 16;
    fc.seed = 7;
    Forest a = train_forest(X, y, 2, fc, 1);
    Forest b = train_forest(X, y, 2, fc, 4);
    REQUIRE(a.tree_seeds == b.tree_seeds);
    REQUIRE(predict_forest(a, X) == predict_forest(b, X));
}

TEST_CASE("train_forest: default mtry is ceil(sqrt(p))") {
    Rng data_rng(21);
    Matrix X = random_matrix(60, 7, data_rng);
    std::vector<int> y = labels_from(X, data_rng);
    ForestConfig fc;
    fc.n_trees = 2;
    fc.seed = 1;
    Forest forest = train_forest(X, y, 2, fc);
    REQUIRE(forest.mtry_used == 3);
}

TEST_CASE("predict_forest: rows stay normalized") {
    Rng data_rng(22);
    Matrix X = random_matrix(150, 4, data_rng);
    std::vector<int> y = labels_from(X, data_rng);
    ForestConfig fc;
    fc.n_trees = 9;
    fc.seed = 2;
    Forest forest = train_forest(X, y, 2, fc);
    Matrix probs = predict_forest(forest, X);
    for (std::size_t i = 0; i < probs.rows; ++i)
        REQUIRE(probs(i, 0) + probs(i, 1) == Catch::Approx(1.0));
}
