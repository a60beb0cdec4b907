#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "surveyml/metrics.hpp"
#include "surveyml/rng.hpp"

using namespace surveyml;

namespace {

// Independent ROC oracle: sweep every distinct score as a cutoff (predict
// positive when score >= cutoff), collect (FPR, TPR) points, integrate by
// trapezoids. Handles ties by construction since tied scores share a cutoff.
double trapezoid_auc(const std::vector<double>& scores, const std::vector<int>& y) {
    std::vector<double> cuts = scores;
    std::sort(cuts.begin(), cuts.end(), std::greater<>());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double n_pos = 0.0, n_neg = 0.0;
    for (int v : y) (v ? n_pos : n_neg) += 1.0;
    double auc = 0.0, prev_fpr = 0.0, prev_tpr = 0.0;
    for (double cut : cuts) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= cut) (y[i] ? tp : fp) += 1.0;
        double tpr = tp / n_pos, fpr = fp / n_neg;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    // The lowest cutoff classifies everything positive, so the sweep always
    // ends at (1, 1); nothing left to close.
    return auc;
}

}  // namespace

TEST_CASE("roc_auc: pair-counting example gives 0.75 exactly") {
    std::vector<double> scores = {0.9, 0.3, 0.8, 0.2};
    std::vector<int> labels = {1, 1, 0, 0};
    REQUIRE(roc_auc(scores, labels) == 0.75);
}

TEST_CASE("roc_auc: perfect separation gives 1.0, all ties give 0.5") {
    REQUIRE(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    REQUIRE(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    REQUIRE(roc_auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}) == 0.0);
}

TEST_CASE("roc_auc: rank method agrees with the threshold-sweep oracle") {
    Rng rng(2024);
    for (int inst = 0; inst < 100; ++inst) {
        std::size_t n = 2 + rng.bounded(499);
        bool discrete = inst % 2 == 1;  // odd instances force heavy ties
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has[2] = {false, false};
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = discrete ? static_cast<double>(rng.bounded(5)) * 0.25
                                 : rng.uniform();
            labels[i] = rng.uniform() < 0.4 ? 1 : 0;
            has[labels[i]] = true;
        }
        if (!has[0]) labels[0] = 0;
        if (!has[1]) labels[n - 1] = 1;
        double got = roc_auc(scores, labels);
        double want = trapezoid_auc(scores, labels);
        REQUIRE(std::abs(got - want) < 1e-9);
    }
}

TEST_CASE("roc_auc: error cases") {
    REQUIRE_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), DataError);
    REQUIRE_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), DataError);
    REQUIRE_THROWS_AS(roc_auc({0.1, 0.2}, {0, 2}), DataError);
    REQUIRE_THROWS_AS(roc_auc({0.1}, {0, 1}), DataError);
}

TEST_CASE("confusion: counts land in (truth, predicted) cells") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2, 2};
    std::vector<int> pred = {0, 1, 1, 1, 2, 0, 2};
    ConfusionMatrix cm = confusion(truth, pred, {"a", "b", "c"});
    REQUIRE(cm.counts[0][0] == 1);
    REQUIRE(cm.counts[0][1] == 1);
    REQUIRE(cm.counts[1][1] == 2);
    REQUIRE(cm.counts[2][0] == 1);
    REQUIRE(cm.counts[2][2] == 2);
    REQUIRE(cm.total() == 7);
    REQUIRE(cm.row_sum(2) == 3);
    REQUIRE(cm.col_sum(1) == 3);
    REQUIRE(accuracy(cm) == Catch::Approx(5.0 / 7.0));
}

TEST_CASE("confusion: rejects mismatched or out-of-range labels") {
    REQUIRE_THROWS_AS(confusion({0, 1}, {0}, {"a", "b"}), DataError);
    REQUIRE_THROWS_AS(confusion({0, 2}, {0, 1}, {"a", "b"}), DataError);
    REQUIRE_THROWS_AS(confusion({0, -1}, {0, 1}, {"a", "b"}), DataError);
}

TEST_CASE("sens_spec: binary mode with labels[1] positive") {
    // truth\pred: TN=50 FP=10 / FN=5 TP=35
    ConfusionMatrix cm;
    cm.labels = {"negative", "positive"};
    cm.counts = {{50, 10}, {5, 35}};
    SensSpec ss = sens_spec(cm, AverageMode::Binary);
    REQUIRE(ss.sensitivity == Catch::Approx(35.0 / 40.0));
    REQUIRE(ss.specificity == Catch::Approx(50.0 / 60.0));
    REQUIRE(ss.excluded_sens.empty());
    REQUIRE(ss.excluded_spec.empty());
}

TEST_CASE("sens_spec: binary mode needs exactly two classes") {
    ConfusionMatrix cm;
    cm.labels = {"a", "b", "c"};
    cm.counts = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    REQUIRE_THROWS_AS(sens_spec(cm, AverageMode::Binary), DataError);
}

TEST_CASE("sens_spec: macro one-vs-rest matches a hand computation") {
    ConfusionMatrix cm;
    cm.labels = {"x", "y", "z"};
    cm.counts = {{8, 1, 1}, {2, 6, 2}, {0, 1, 9}};
    SensSpec ss = sens_spec(cm, AverageMode::MacroOvr);
    // recalls: 8/10, 6/10, 9/10
    REQUIRE(ss.sensitivity == Catch::Approx((0.8 + 0.6 + 0.9) / 3.0));
    // specificities: 18/20, 18/20, 17/20
    REQUIRE(ss.specificity == Catch::Approx((0.9 + 0.9 + 0.85) / 3.0));
}

TEST_CASE("sens_spec: macro drops classes with empty denominators") {
    ConfusionMatrix cm;
    cm.labels = {"seen", "absent"};
    cm.counts = {{5, 0}, {0, 0}};  // no true "absent" rows
    SensSpec ss = sens_spec(cm, AverageMode::MacroOvr);
    REQUIRE(ss.sensitivity == 1.0);
    REQUIRE(ss.excluded_sens == std::vector<std::string>{"absent"});
}

TEST_CASE("sens_spec: micro pools counts over classes") {
    ConfusionMatrix cm;
    cm.labels = {"x", "y", "z"};
    cm.counts = {{8, 1, 1}, {2, 6, 2}, {0, 1, 9}};
    SensSpec ss = sens_spec(cm, AverageMode::MicroOvr);
    // micro sensitivity equals accuracy for single-label problems
    REQUIRE(ss.sensitivity == Catch::Approx(accuracy(cm)));
    long long total = cm.total();
    long long tn_sum = 0, fp_sum = 0;
    for (int c = 0; c < 3; ++c) {
        long long tpc = cm.counts[c][c];
        long long fnc = cm.row_sum(c) - tpc;
        long long fpc = cm.col_sum(c) - tpc;
        tn_sum += total - tpc - fnc - fpc;
        fp_sum += fpc;
    }
    REQUIRE(ss.specificity ==
            Catch::Approx(static_cast<double>(tn_sum) / static_cast<double>(tn_sum + fp_sum)));
}
