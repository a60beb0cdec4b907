#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"
#include "surveyml/matrix.hpp"

namespace surveyml {

// Rows are true labels, columns are predicted labels.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<long long>> counts;

    long long total() const {
        long long t = 0;
        for (const auto& row : counts)
            for (long long c : row) t += c;
        return t;
    }

    long long row_sum(std::size_t r) const {
        return std::accumulate(counts[r].begin(), counts[r].end(), 0LL);
    }

    long long col_sum(std::size_t c) const {
        long long s = 0;
        for (const auto& row : counts) s += row[c];
        return s;
    }

    nlohmann::ordered_json to_json() const {
        return {{"labels", labels}, {"counts", counts}};
    }
};

inline ConfusionMatrix confusion(const std::vector<int>& truth,
                                 const std::vector<int>& predicted,
                                 const std::vector<std::string>& labels) {
    if (truth.size() != predicted.size())
        throw DataError("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<long long>(labels.size(), 0));
    int n = static_cast<int>(labels.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= n || predicted[i] < 0 || predicted[i] >= n)
            throw DataError("confusion: label outside declared order at row " + std::to_string(i));
        ++cm.counts[truth[i]][predicted[i]];
    }
    return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
    long long t = cm.total();
    if (t == 0) return 0.0;
    long long diag = 0;
    for (std::size_t i = 0; i < cm.counts.size(); ++i) diag += cm.counts[i][i];
    return static_cast<double>(diag) / static_cast<double>(t);
}

enum class AverageMode { Binary, MacroOvr, MicroOvr };

struct SensSpec {
    double sensitivity = 0.0;
    double specificity = 0.0;
    // Classes dropped from a macro mean because their denominator was zero.
    std::vector<std::string> excluded_sens;
    std::vector<std::string> excluded_spec;
};

// Binary mode treats labels[1] as the positive class. Macro/micro modes use
// one-vs-rest recalls and specificities over all classes.
inline SensSpec sens_spec(const ConfusionMatrix& cm, AverageMode mode) {
    std::size_t k = cm.labels.size();
    SensSpec out;
    if (mode == AverageMode::Binary) {
        if (k != 2) throw DataError("sens_spec: binary mode needs exactly 2 classes");
        double tp = static_cast<double>(cm.counts[1][1]);
        double fn = static_cast<double>(cm.counts[1][0]);
        double tn = static_cast<double>(cm.counts[0][0]);
        double fp = static_cast<double>(cm.counts[0][1]);
        out.sensitivity = (tp + fn > 0) ? tp / (tp + fn) : 0.0;
        out.specificity = (tn + fp > 0) ? tn / (tn + fp) : 0.0;
        if (tp + fn == 0) out.excluded_sens.push_back(cm.labels[1]);
        if (tn + fp == 0) out.excluded_spec.push_back(cm.labels[0]);
        return out;
    }
    long long total = cm.total();
    double sens_sum = 0.0, spec_sum = 0.0;
    std::size_t sens_n = 0, spec_n = 0;
    long long micro_tp = 0, micro_fn = 0, micro_tn = 0, micro_fp = 0;
    for (std::size_t c = 0; c < k; ++c) {
        long long tp = cm.counts[c][c];
        long long fn = cm.row_sum(c) - tp;
        long long fp = cm.col_sum(c) - tp;
        long long tn = total - tp - fn - fp;
        if (mode == AverageMode::MicroOvr) {
            micro_tp += tp;
            micro_fn += fn;
            micro_fp += fp;
            micro_tn += tn;
            continue;
        }
        if (tp + fn > 0) {
            sens_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
            ++sens_n;
        } else {
            out.excluded_sens.push_back(cm.labels[c]);
        }
        if (tn + fp > 0) {
            spec_sum += static_cast<double>(tn) / static_cast<double>(tn + fp);
            ++spec_n;
        } else {
            out.excluded_spec.push_back(cm.labels[c]);
        }
    }
    if (mode == AverageMode::MicroOvr) {
        out.sensitivity = (micro_tp + micro_fn > 0)
                              ? static_cast<double>(micro_tp) / static_cast<double>(micro_tp + micro_fn)
                              : 0.0;
        out.specificity = (micro_tn + micro_fp > 0)
                              ? static_cast<double>(micro_tn) / static_cast<double>(micro_tn + micro_fp)
                              : 0.0;
        return out;
    }
    out.sensitivity = sens_n > 0 ? sens_sum / static_cast<double>(sens_n) : 0.0;
    out.specificity = spec_n > 0 ? spec_sum / static_cast<double>(spec_n) : 0.0;
    return out;
}

// Rank-based ROC-AUC: P(score_pos > score_neg) + 0.5 * P(tie). Ties receive
// averaged ranks.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DataError("roc_auc: scores and labels differ in length");
    std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("roc_auc: labels must be 0/1");
        n_pos += static_cast<std::size_t>(y);
    }
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("roc_auc: undefined when only one class is present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Average rank for the tie block [i, j); ranks are 1-based.
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    double np = static_cast<double>(n_pos);
    double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace surveyml
