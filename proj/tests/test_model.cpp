#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "surveyml/model.hpp"
#include "surveyml/rng.hpp"

using namespace surveyml;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
    Matrix X(n, p);
    for (double& v : X.data) v = static_cast<double>(rng.bounded(6));
    return X;
}

std::vector<int> threshold_labels(const Matrix& X) {
    std::vector<int> y(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) y[i] = X(i, 0) > 2.5;
    return y;
}

}  // namespace

TEST_CASE("predict_proba: logistic model emits (1-p, p)") {
    Rng rng(1);
    Matrix X = random_matrix(40, 2, rng);
    TrainedModel model = train_logistic(X, threshold_labels(X));
    Matrix probs = predict_proba(model, X);
    REQUIRE(probs.cols == 2);
    for (std::size_t i = 0; i < probs.rows; ++i)
        REQUIRE(probs(i, 0) + probs(i, 1) == Catch::Approx(1.0));
}

TEST_CASE("model JSON: logistic round-trip reproduces predictions exactly") {
    Rng rng(2);
    Matrix X = random_matrix(60, 3, rng);
    TrainedModel model = train_logistic(X, threshold_labels(X));
    TrainedModel back = model_from_json(model_to_json(model));
    REQUIRE(predict_proba(model, X) == predict_proba(back, X));
}

TEST_CASE("model JSON: tree round-trip reproduces structure and predictions") {
    Rng rng(3);
    Matrix X = random_matrix(80, 3, rng);
    std::vector<int> y = threshold_labels(X);
    Rng tree_rng(5);
    TrainedModel model = train_tree(X, y, 2, {}, tree_rng);
    nlohmann::ordered_json j = model_to_json(model);
    TrainedModel back = model_from_json(j);
    REQUIRE(predict_proba(model, X) == predict_proba(back, X));
    REQUIRE(model_to_json(back) == j);  // stable through repeated round-trips
}

TEST_CASE("model JSON: forest round-trip keeps seeds and predictions") {
    Rng rng(4);
    Matrix X = random_matrix(70, 3, rng);
    ForestConfig fc;
    fc.n_trees = 5;
    fc.seed = 17;
    TrainedModel model = train_forest(X, threshold_labels(X), 2, fc);
    TrainedModel back = model_from_json(model_to_json(model));
    REQUIRE(std::get<Forest>(back).tree_seeds == std::get<Forest>(model).tree_seeds);
    REQUIRE(predict_proba(model, X) == predict_proba(back, X));
}

TEST_CASE("model JSON: schema and type guards") {
    nlohmann::json j = {{"schema_version", 2}, {"type", "logistic"}};
    REQUIRE_THROWS_AS(model_from_json(j), ConfigError);
    j["schema_version"] = 1;
    j["type"] = "svm";
    REQUIRE_THROWS_AS(model_from_json(j), ConfigError);
}
