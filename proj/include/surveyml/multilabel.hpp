#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surveyml/class4.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/model.hpp"
#include "surveyml/parallel.hpp"

namespace surveyml {

enum class LearnerKind { Logistic, Tree, Forest };

inline std::string learner_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::Logistic: return "logistic";
        case LearnerKind::Tree: return "tree";
        case LearnerKind::Forest: return "forest";
    }
    return "?";
}

struct LearnerConfig {
    LogisticConfig logistic;
    TreeConfig tree;
    ForestConfig forest;
};

inline TrainedModel train_binary(const Matrix& X, const std::vector<int>& y,
                                 LearnerKind kind, const LearnerConfig& cfg,
                                 std::uint64_t seed, unsigned threads = 1) {
    switch (kind) {
        case LearnerKind::Logistic:
            return train_logistic(X, y, cfg.logistic);
        case LearnerKind::Tree: {
            Rng rng(seed);
            return train_tree(X, y, 2, cfg.tree, rng);
        }
        case LearnerKind::Forest: {
            ForestConfig fc = cfg.forest;
            fc.seed = seed;
            return train_forest(X, y, 2, fc, threads);
        }
    }
    throw ConfigError("train_binary: unknown learner kind");
}

// Two independent binary heads; the joint four-way decision combines the
// per-head 0.5-threshold calls, ties resolving toward the negative flag.
struct MultilabelModel {
    TrainedModel asd_head;
    TrainedModel adhd_head;
};

inline MultilabelModel train_multilabel(const Matrix& X, const std::vector<int>& y_asd,
                                        const std::vector<int>& y_adhd, LearnerKind kind,
                                        const LearnerConfig& cfg, std::uint64_t seed,
                                        unsigned threads = 1) {
    if (y_asd.size() != X.rows || y_adhd.size() != X.rows)
        throw DataError("train_multilabel: label/row mismatch");
    MultilabelModel model;
    std::uint64_t seeds[2] = {derive_seed(seed, {0}), derive_seed(seed, {1})};
    TrainedModel* heads[2] = {&model.asd_head, &model.adhd_head};
    const std::vector<int>* ys[2] = {&y_asd, &y_adhd};
    // Heads in parallel; forests then train their trees serially inside.
    unsigned inner = threads > 1 ? (threads + 1) / 2 : 1;
    parallel_for(2, threads > 1 ? 2 : 1, [&](std::size_t h) {
        *heads[h] = train_binary(X, *ys[h], kind, cfg, seeds[h], inner);
    });
    return model;
}

struct MultilabelPrediction {
    std::vector<double> p_asd;
    std::vector<double> p_adhd;
    Matrix joint;              // n x 4, outer product of head marginals
    std::vector<int> class4;   // thresholded joint decision
};

inline MultilabelPrediction predict_multilabel(const MultilabelModel& model,
                                               const Matrix& X) {
    MultilabelPrediction out;
    Matrix pa = predict_proba(model.asd_head, X);
    Matrix pd = predict_proba(model.adhd_head, X);
    out.p_asd.resize(X.rows);
    out.p_adhd.resize(X.rows);
    out.joint = Matrix(X.rows, kNumClass4);
    out.class4.resize(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double a = pa(i, 1), d = pd(i, 1);
        out.p_asd[i] = a;
        out.p_adhd[i] = d;
        out.joint(i, 0) = (1.0 - a) * (1.0 - d);
        out.joint(i, 1) = a * (1.0 - d);
        out.joint(i, 2) = (1.0 - a) * d;
        out.joint(i, 3) = a * d;
        out.class4[i] = static_cast<int>(class4_from_flags(a > 0.5, d > 0.5));
    }
    return out;
}

}  // namespace surveyml
