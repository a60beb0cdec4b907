#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"
#include "surveyml/forest.hpp"
#include "surveyml/metrics.hpp"
#include "surveyml/multilabel.hpp"
#include "surveyml/parallel.hpp"
#include "surveyml/rng.hpp"

namespace surveyml {

// Scores a candidate feature subset; the seed is pre-derived per
// (step, candidate) so candidate evaluations parallelize deterministically.
using SubsetScorer = std::function<double(const std::vector<int>&, std::uint64_t)>;

struct SelectionStep {
    int feature = -1;
    std::string name;
    double score = 0.0;
};

struct SelectionTrace {
    std::vector<SelectionStep> steps;
    std::vector<int> subset;  // final subset, in greedy order
    std::string scorer;
    nlohmann::json learner_config;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["scorer"] = scorer;
        j["learner_config"] = learner_config;
        j["steps"] = nlohmann::ordered_json::array();
        for (const auto& s : steps)
            j["steps"].push_back(
                {{"feature", s.feature}, {"name", s.name}, {"score", s.score}});
        j["subset"] = subset;
        return j;
    }
};

// Sequential forward selection: at each step every remaining candidate is
// scored with the current subset plus that candidate, and the argmax joins the
// subset. Score ties at 1e-12 resolve to the lower feature index. Test rows
// are not an input here by design: selection can only see train/val data
// through the scorer.
inline SelectionTrace sfs_forward(int n_features, int k, const SubsetScorer& scorer,
                                  std::uint64_t seed,
                                  const std::vector<std::string>& feature_names = {},
                                  unsigned threads = 1) {
    if (k < 1 || k > n_features)
        throw ConfigError("sfs_forward: k must be in [1, feature count]");
    SelectionTrace trace;
    std::vector<int> remaining(n_features);
    std::iota(remaining.begin(), remaining.end(), 0);

    for (int step = 0; step < k; ++step) {
        std::vector<double> scores(remaining.size());
        parallel_for(remaining.size(), threads, [&](std::size_t i) {
            std::vector<int> candidate = trace.subset;
            candidate.push_back(remaining[i]);
            std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(step),
                                                 static_cast<std::uint64_t>(remaining[i])});
            scores[i] = scorer(candidate, s);
        });
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best] + 1e-12) best = i;
            // equal scores keep the earlier (lower-index) candidate
        }
        int feature = remaining[best];
        trace.subset.push_back(feature);
        SelectionStep s;
        s.feature = feature;
        s.name = feature < static_cast<int>(feature_names.size())
                     ? feature_names[feature]
                     : "f" + std::to_string(feature);
        s.score = scores[best];
        trace.steps.push_back(std::move(s));
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return trace;
}

// Wrapped-RF scorer for a binary task: train on the subset, ROC-AUC on the
// validation partition.
inline SubsetScorer make_forest_auc_scorer(const Matrix& X_train,
                                           const std::vector<int>& y_train,
                                           const Matrix& X_val,
                                           const std::vector<int>& y_val,
                                           ForestConfig cfg) {
    bool has[2] = {false, false};
    for (int y : y_val) has[y != 0] = true;
    if (!has[0] || !has[1])
        throw DataError("sfs scorer: validation labels are single-class");
    return [=](const std::vector<int>& subset, std::uint64_t seed) {
        ForestConfig fc = cfg;
        fc.seed = seed;
        Forest forest = train_forest(X_train.select_cols(subset), y_train, 2, fc);
        Matrix probs = predict_forest(forest, X_val.select_cols(subset));
        std::vector<double> scores(probs.rows);
        for (std::size_t i = 0; i < probs.rows; ++i) scores[i] = probs(i, 1);
        return roc_auc(scores, y_val);
    };
}

// Multilabel objective: mean of the two head AUCs, each head a wrapped RF.
inline SubsetScorer make_multilabel_forest_scorer(const Matrix& X_train,
                                                  const std::vector<int>& y_asd_train,
                                                  const std::vector<int>& y_adhd_train,
                                                  const Matrix& X_val,
                                                  const std::vector<int>& y_asd_val,
                                                  const std::vector<int>& y_adhd_val,
                                                  ForestConfig cfg) {
    for (const auto* y : {&y_asd_val, &y_adhd_val}) {
        bool has[2] = {false, false};
        for (int v : *y) has[v != 0] = true;
        if (!has[0] || !has[1])
            throw DataError("sfs scorer: validation labels are single-class");
    }
    return [=](const std::vector<int>& subset, std::uint64_t seed) {
        double total = 0.0;
        const std::vector<int>* trains[2] = {&y_asd_train, &y_adhd_train};
        const std::vector<int>* vals[2] = {&y_asd_val, &y_adhd_val};
        Matrix Xt = X_train.select_cols(subset);
        Matrix Xv = X_val.select_cols(subset);
        for (int head = 0; head < 2; ++head) {
            ForestConfig fc = cfg;
            fc.seed = derive_seed(seed, {static_cast<std::uint64_t>(head)});
            Forest forest = train_forest(Xt, *trains[head], 2, fc);
            Matrix probs = predict_forest(forest, Xv);
            std::vector<double> scores(probs.rows);
            for (std::size_t i = 0; i < probs.rows; ++i) scores[i] = probs(i, 1);
            total += roc_auc(scores, *vals[head]);
        }
        return total / 2.0;
    };
}

}  // namespace surveyml
