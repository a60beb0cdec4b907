#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "surveyml/selection.hpp"
#include "surveyml/rng.hpp"

using namespace surveyml;

namespace {

// Exhaustive per-step oracle: score every remaining candidate, take the
// argmax under the same 1e-12 tie rule, repeat. No shared code with
// sfs_forward beyond the scorer interface.
std::vector<SelectionStep> oracle_trace(int p, int k, const SubsetScorer& scorer,
                                        std::uint64_t seed) {
    std::vector<SelectionStep> steps;
    std::vector<int> subset;
    std::vector<bool> taken(p, false);
    for (int step = 0; step < k; ++step) {
        int best_f = -1;
        double best_score = 0.0;
        for (int f = 0; f < p; ++f) {
            if (taken[f]) continue;
            std::vector<int> candidate = subset;
            candidate.push_back(f);
            double s = scorer(candidate, derive_seed(seed, {static_cast<std::uint64_t>(step),
                                                            static_cast<std::uint64_t>(f)}));
            if (best_f < 0 || s > best_score + 1e-12) {
                best_f = f;
                best_score = s;
            }
        }
        taken[best_f] = true;
        subset.push_back(best_f);
        steps.push_back({best_f, "f" + std::to_string(best_f), best_score});
    }
    return steps;
}

// Deterministic synthetic objective with diminishing returns, plus a small
// seed-dependent perturbation so the derived per-candidate seeds matter.
SubsetScorer make_synthetic_scorer(std::uint64_t instance) {
    return [instance](const std::vector<int>& subset, std::uint64_t seed) {
        Rng base(instance);
        std::vector<double> gain(8);
        for (double& g : gain) g = base.uniform();
        double total = 0.0, redundancy = 0.0;
        for (std::size_t i = 0; i < subset.size(); ++i) {
            total += gain[static_cast<std::size_t>(subset[i])];
            for (std::size_t j = 0; j < i; ++j)
                redundancy += 0.07 * gain[static_cast<std::size_t>(subset[j])] *
                              gain[static_cast<std::size_t>(subset[i])];
        }
        Rng jitter(seed);
        return total - redundancy + 0.01 * jitter.uniform();
    };
}

}  // namespace

TEST_CASE("sfs_forward: greedy trace matches the exhaustive per-step oracle") {
    Rng rng(60);
    for (int seed_idx = 0; seed_idx < 10; ++seed_idx) {
        int p = 4 + static_cast<int>(rng.bounded(5));  // <= 8
        int k = 1 + static_cast<int>(rng.bounded(4));  // <= 4
        std::uint64_t seed = 5000 + static_cast<std::uint64_t>(seed_idx);
        SubsetScorer scorer = make_synthetic_scorer(seed * 31);

        SelectionTrace trace = sfs_forward(p, k, scorer, seed);
        std::vector<SelectionStep> want = oracle_trace(p, k, scorer, seed);
        REQUIRE(trace.steps.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            REQUIRE(trace.steps[i].feature == want[i].feature);
            REQUIRE(trace.steps[i].score == want[i].score);
            REQUIRE(trace.steps[i].name == want[i].name);
        }
        std::vector<int> subset;
        for (const auto& s : want) subset.push_back(s.feature);
        REQUIRE(trace.subset == subset);
    }
}

TEST_CASE("sfs_forward: thread count does not change the trace") {
    SubsetScorer scorer = make_synthetic_scorer(9);
    SelectionTrace a = sfs_forward(8, 4, scorer, 42, {}, 1);
    SelectionTrace b = sfs_forward(8, 4, scorer, 42, {}, 4);
    REQUIRE(a.subset == b.subset);
    for (std::size_t i = 0; i < a.steps.size(); ++i)
        REQUIRE(a.steps[i].score == b.steps[i].score);
}

TEST_CASE("sfs_forward: constant scores resolve ties to the lowest index") {
    SubsetScorer flat = [](const std::vector<int>&, std::uint64_t) { return 0.5; };
    SelectionTrace trace = sfs_forward(6, 3, flat, 1);
    REQUIRE(trace.subset == std::vector<int>{0, 1, 2});
}

TEST_CASE("sfs_forward: feature names flow into the trace") {
    SubsetScorer flat = [](const std::vector<int>&, std::uint64_t) { return 0.0; };
    SelectionTrace trace = sfs_forward(3, 2, flat, 1, {"alpha", "beta", "gamma"});
    REQUIRE(trace.steps[0].name == "alpha");
    REQUIRE(trace.steps[1].name == "beta");
}

TEST_CASE("sfs_forward: k out of range throws") {
    SubsetScorer flat = [](const std::vector<int>&, std::uint64_t) { return 0.0; };
    REQUIRE_THROWS_AS(sfs_forward(4, 0, flat, 1), ConfigError);
    REQUIRE_THROWS_AS(sfs_forward(4, 5, flat, 1), ConfigError);
}

TEST_CASE("make_forest_auc_scorer: matches the oracle on a real wrapped model") {
    Rng rng(71);
    std::size_t n = 160, p = 6;
    Matrix X(n, p);
    for (double& v : X.data) v = static_cast<double>(rng.bounded(5));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = (X(i, 0) + X(i, 2) > 4.0) != (rng.uniform() < 0.15);
    std::vector<int> train_idx, val_idx;
    for (std::size_t i = 0; i < n; ++i) (i % 4 ? train_idx : val_idx).push_back(static_cast<int>(i));
    std::vector<std::size_t> tr(train_idx.begin(), train_idx.end());
    std::vector<std::size_t> va(val_idx.begin(), val_idx.end());
    Matrix X_train = X.select_rows(tr), X_val = X.select_rows(va);
    std::vector<int> y_train, y_val;
    for (std::size_t i : tr) y_train.push_back(y[i]);
    for (std::size_t i : va) y_val.push_back(y[i]);

    ForestConfig fc;
    fc.n_trees = 8;
    SubsetScorer scorer = make_forest_auc_scorer(X_train, y_train, X_val, y_val, fc);
    SelectionTrace trace = sfs_forward(static_cast<int>(p), 3, scorer, 314);
    std::vector<SelectionStep> want = oracle_trace(static_cast<int>(p), 3, scorer, 314);
    for (std::size_t i = 0; i < want.size(); ++i) {
        REQUIRE(trace.steps[i].feature == want[i].feature);
        REQUIRE(trace.steps[i].score == want[i].score);
    }
}

TEST_CASE("forest scorers: single-class validation labels are rejected") {
    Matrix X(8, 2);
    std::vector<int> y_mixed = {0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<int> y_flat(8, 1);
    ForestConfig fc;
    REQUIRE_THROWS_AS(make_forest_auc_scorer(X, y_mixed, X, y_flat, fc), DataError);
    REQUIRE_THROWS_AS(
        make_multilabel_forest_scorer(X, y_mixed, y_mixed, X, y_mixed, y_flat, fc),
        DataError);
}
