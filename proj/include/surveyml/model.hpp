#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"
#include "surveyml/forest.hpp"
#include "surveyml/logistic.hpp"
#include "surveyml/matrix.hpp"
#include "surveyml/tree.hpp"

namespace surveyml {

using TrainedModel = std::variant<LinearModel, TreeNode, Forest>;

// Per-row class-probability vectors; rows sum to 1. The logistic binary model
// reports (1-p, p).
inline Matrix predict_proba(const TrainedModel& model, const Matrix& X) {
    if (const auto* lm = std::get_if<LinearModel>(&model)) {
        std::vector<double> p = predict_logistic(*lm, X);
        Matrix out(X.rows, 2);
        for (std::size_t i = 0; i < X.rows; ++i) {
            out(i, 0) = 1.0 - p[i];
            out(i, 1) = p[i];
        }
        return out;
    }
    if (const auto* tree = std::get_if<TreeNode>(&model)) {
        if (X.rows > 0 && tree_predict_row(*tree, X.row(0)).size() == 0)
            throw DataError("predict_proba: untrained tree");
        int n_classes = static_cast<int>(
            X.rows > 0 ? tree_predict_row(*tree, X.row(0)).size() : 0);
        return predict_tree(*tree, X, n_classes);
    }
    const auto& forest = std::get<Forest>(model);
    return predict_forest(forest, X);
}

// ---- JSON serialization (schema_version 1) ----
//
// Thresholds and weights round-trip exactly: nlohmann emits shortest decimal
// forms that parse back to the identical double.

inline nlohmann::ordered_json tree_node_to_json(const TreeNode& node) {
    if (node.is_leaf()) return {{"probs", node.probs}};
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"left", tree_node_to_json(*node.left)},
            {"right", tree_node_to_json(*node.right)}};
}

inline TreeNode tree_node_from_json(const nlohmann::json& j) {
    TreeNode node;
    if (j.contains("probs")) {
        node.probs = j.at("probs").get<std::vector<double>>();
        return node;
    }
    node.feature = j.at("feature").get<int>();
    node.threshold = j.at("threshold").get<double>();
    node.left = std::make_unique<TreeNode>(tree_node_from_json(j.at("left")));
    node.right = std::make_unique<TreeNode>(tree_node_from_json(j.at("right")));
    return node;
}

inline nlohmann::ordered_json model_to_json(const TrainedModel& model) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    if (const auto* lm = std::get_if<LinearModel>(&model)) {
        j["type"] = "logistic";
        j["weights"] = lm->weights;
        j["bias"] = lm->bias;
        j["feature_mean"] = lm->feature_mean;
        j["feature_sd"] = lm->feature_sd;
        j["constant"] = lm->constant;
    } else if (const auto* tree = std::get_if<TreeNode>(&model)) {
        j["type"] = "tree";
        j["root"] = tree_node_to_json(*tree);
    } else {
        const auto& forest = std::get<Forest>(model);
        j["type"] = "forest";
        j["n_classes"] = forest.n_classes;
        j["mtry_used"] = forest.mtry_used;
        j["tree_seeds"] = forest.tree_seeds;
        nlohmann::ordered_json trees = nlohmann::ordered_json::array();
        for (const auto& t : forest.trees) trees.push_back(tree_node_to_json(t));
        j["trees"] = std::move(trees);
    }
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1)
        throw ConfigError("model_from_json: unsupported schema version");
    std::string type = j.at("type").get<std::string>();
    if (type == "logistic") {
        LinearModel lm;
        lm.weights = j.at("weights").get<std::vector<double>>();
        lm.bias = j.at("bias").get<double>();
        lm.feature_mean = j.at("feature_mean").get<std::vector<double>>();
        lm.feature_sd = j.at("feature_sd").get<std::vector<double>>();
        lm.constant = j.at("constant").get<bool>();
        return lm;
    }
    if (type == "tree") return tree_node_from_json(j.at("root"));
    if (type == "forest") {
        Forest forest;
        forest.n_classes = j.at("n_classes").get<int>();
        forest.mtry_used = j.at("mtry_used").get<int>();
        forest.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
        for (const auto& t : j.at("trees")) forest.trees.push_back(tree_node_from_json(t));
        return forest;
    }
    throw ConfigError("model_from_json: unknown model type '" + type + "'");
}

}  // namespace surveyml
