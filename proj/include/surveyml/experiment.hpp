#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/class4.hpp"
#include "surveyml/codebook.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/features.hpp"
#include "surveyml/impute.hpp"
#include "surveyml/inspect.hpp"
#include "surveyml/labels.hpp"
#include "surveyml/loader.hpp"
#include "surveyml/metrics.hpp"
#include "surveyml/multilabel.hpp"
#include "surveyml/selection.hpp"
#include "surveyml/split.hpp"
#include "surveyml/summary.hpp"
#include "surveyml/synthetic.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

enum class TaskId { T1 = 0, T2 = 1, T3 = 2 };

inline std::string task_name(TaskId t) {
    switch (t) {
        case TaskId::T1: return "T1";
        case TaskId::T2: return "T2";
        case TaskId::T3: return "T3";
    }
    return "?";
}

inline TaskId task_from_name(const std::string& s) {
    if (s == "T1") return TaskId::T1;
    if (s == "T2") return TaskId::T2;
    if (s == "T3") return TaskId::T3;
    throw ConfigError("unknown task id '" + s + "'");
}

// Per-row targets. T1: any listed condition vs none at all. T2: ASD or ADHD
// vs condition-free; rows carrying only other conditions are excluded (-1).
// T3: the four-way class. -1 always means "row not in this task".
inline std::vector<int> task_labels(const CohortLabels& labels, TaskId task) {
    std::size_t n = labels.n_rows();
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        switch (task) {
            case TaskId::T1:
                y[r] = labels.any_condition(r) ? 1 : 0;
                break;
            case TaskId::T2:
                if (labels.asd[r] == 1 || labels.adhd[r] == 1)
                    y[r] = 1;
                else
                    y[r] = labels.any_condition(r) ? -1 : 0;
                break;
            case TaskId::T3:
                y[r] = labels.class4[r];
                break;
        }
    }
    return y;
}

struct SfsConfig {
    bool enabled = true;
    int k = 12;
    int search_n_trees = 25;  // reduced forest during search; final retrain is full size
    std::string feature_set = "combined";
};

struct InspectConfig {
    bool enabled = true;
    int importance_repeats = 3;
    int pd_features = 3;  // partial dependence for the top-N important features
};

struct RealDataConfig {
    std::vector<std::pair<std::string, std::string>> files;  // (path, survey year)
    std::string codebook_path;
    std::string asd_item = "asd_ever";
    std::string adhd_item = "adhd_ever";
    std::vector<std::string> aux_items;
    DemographicColumns demographics;
};

struct ExperimentConfig {
    std::string source = "synthetic";  // "synthetic" | "files"
    SyntheticSpec synthetic = default_synthetic_spec(20000, 1);
    RealDataConfig real;
    std::vector<TaskId> tasks = {TaskId::T1, TaskId::T2, TaskId::T3};
    std::vector<FeatureGroup> feature_sets = {reference_group1(), reference_group2(),
                                              reference_combined()};
    std::vector<LearnerKind> learners = {LearnerKind::Logistic, LearnerKind::Tree};
    LearnerConfig learner;
    ImputeConfig impute;
    bool impute_combined = true;  // false falls back to complete-case everywhere
    SfsConfig sfs;
    InspectConfig inspect;
    std::uint64_t seed = 8675309;
    std::string output_dir = "out";
    unsigned threads = 1;

    void validate() const {
        if (tasks.empty()) throw ConfigError("config: at least one task required");
        if (feature_sets.empty()) throw ConfigError("config: at least one feature set required");
        if (learners.empty()) throw ConfigError("config: at least one learner required");
        for (const auto& g : feature_sets) g.validate();
        if (source != "synthetic" && source != "files")
            throw ConfigError("config: source must be 'synthetic' or 'files'");
        if (source == "files" && real.files.empty())
            throw ConfigError("config: source 'files' needs at least one data file");
    }

    nlohmann::ordered_json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

inline nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["source"] = source;
    j["synthetic"] = synthetic.to_json();
    nlohmann::ordered_json jr;
    jr["files"] = nlohmann::ordered_json::array();
    for (const auto& [path, year] : real.files)
        jr["files"].push_back({{"path", path}, {"year", year}});
    jr["codebook"] = real.codebook_path;
    jr["asd_item"] = real.asd_item;
    jr["adhd_item"] = real.adhd_item;
    jr["aux_items"] = real.aux_items;
    jr["demographics"] = {{"age", real.demographics.age},
                          {"sex", real.demographics.sex},
                          {"race", real.demographics.race}};
    j["real"] = std::move(jr);
    j["tasks"] = nlohmann::ordered_json::array();
    for (TaskId t : tasks) j["tasks"].push_back(task_name(t));
    j["feature_sets"] = nlohmann::ordered_json::array();
    for (const auto& g : feature_sets)
        j["feature_sets"].push_back({{"name", g.name}, {"members", g.members}});
    j["learners"] = nlohmann::ordered_json::array();
    for (LearnerKind k : learners) j["learners"].push_back(learner_name(k));
    j["learner"] = {
        {"logistic",
         {{"l2_lambda", learner.logistic.l2_lambda},
          {"max_iters", learner.logistic.max_iters},
          {"tol", learner.logistic.tol}}},
        {"tree",
         {{"max_depth", learner.tree.max_depth},
          {"min_samples_leaf", learner.tree.min_samples_leaf},
          {"mtry", learner.tree.mtry}}},
        {"forest",
         {{"n_trees", learner.forest.n_trees},
          {"mtry", learner.forest.mtry},
          {"bootstrap", learner.forest.bootstrap},
          {"max_depth", learner.forest.tree.max_depth},
          {"min_samples_leaf", learner.forest.tree.min_samples_leaf}}}};
    j["impute"] = {{"k", impute.k},
                   {"weighting", impute.weighting == ImputeConfig::Weighting::Uniform
                                     ? "uniform"
                                     : "inverse_distance"}};
    j["impute_combined"] = impute_combined;
    j["sfs"] = {{"enabled", sfs.enabled},
                {"k", sfs.k},
                {"search_n_trees", sfs.search_n_trees},
                {"feature_set", sfs.feature_set}};
    j["inspect"] = {{"enabled", inspect.enabled},
                    {"importance_repeats", inspect.importance_repeats},
                    {"pd_features", inspect.pd_features}};
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["threads"] = threads;
    return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.source = j.value("source", cfg.source);
        if (j.contains("synthetic")) cfg.synthetic = SyntheticSpec::from_json(j["synthetic"]);
        if (j.contains("real")) {
            const auto& jr = j["real"];
            cfg.real.files.clear();
            for (const auto& f : jr.value("files", nlohmann::json::array()))
                cfg.real.files.emplace_back(f.at("path").get<std::string>(),
                                            f.at("year").get<std::string>());
            cfg.real.codebook_path = jr.value("codebook", std::string());
            cfg.real.asd_item = jr.value("asd_item", cfg.real.asd_item);
            cfg.real.adhd_item = jr.value("adhd_item", cfg.real.adhd_item);
            cfg.real.aux_items =
                jr.value("aux_items", std::vector<std::string>());
            if (jr.contains("demographics")) {
                const auto& jd = jr["demographics"];
                cfg.real.demographics.age = jd.value("age", cfg.real.demographics.age);
                cfg.real.demographics.sex = jd.value("sex", cfg.real.demographics.sex);
                cfg.real.demographics.race = jd.value("race", cfg.real.demographics.race);
            }
        }
        if (j.contains("tasks")) {
            cfg.tasks.clear();
            for (const auto& t : j["tasks"]) cfg.tasks.push_back(task_from_name(t));
        }
        if (j.contains("feature_sets")) {
            cfg.feature_sets.clear();
            for (const auto& g : j["feature_sets"])
                cfg.feature_sets.push_back({g.at("name").get<std::string>(),
                                            g.at("members").get<std::vector<std::string>>()});
        }
        if (j.contains("learners")) {
            cfg.learners.clear();
            for (const auto& l : j["learners"]) {
                std::string name = l.get<std::string>();
                if (name == "logistic")
                    cfg.learners.push_back(LearnerKind::Logistic);
                else if (name == "tree")
                    cfg.learners.push_back(LearnerKind::Tree);
                else if (name == "forest")
                    cfg.learners.push_back(LearnerKind::Forest);
                else
                    throw ConfigError("unknown learner '" + name + "'");
            }
        }
        if (j.contains("learner")) {
            const auto& jl = j["learner"];
            if (jl.contains("logistic")) {
                cfg.learner.logistic.l2_lambda =
                    jl["logistic"].value("l2_lambda", cfg.learner.logistic.l2_lambda);
                cfg.learner.logistic.max_iters =
                    jl["logistic"].value("max_iters", cfg.learner.logistic.max_iters);
                cfg.learner.logistic.tol = jl["logistic"].value("tol", cfg.learner.logistic.tol);
            }
            if (jl.contains("tree")) {
                cfg.learner.tree.max_depth =
                    jl["tree"].value("max_depth", cfg.learner.tree.max_depth);
                cfg.learner.tree.min_samples_leaf =
                    jl["tree"].value("min_samples_leaf", cfg.learner.tree.min_samples_leaf);
                cfg.learner.tree.mtry = jl["tree"].value("mtry", cfg.learner.tree.mtry);
            }
            if (jl.contains("forest")) {
                cfg.learner.forest.n_trees =
                    jl["forest"].value("n_trees", cfg.learner.forest.n_trees);
                cfg.learner.forest.mtry = jl["forest"].value("mtry", cfg.learner.forest.mtry);
                cfg.learner.forest.bootstrap =
                    jl["forest"].value("bootstrap", cfg.learner.forest.bootstrap);
                cfg.learner.forest.tree.max_depth =
                    jl["forest"].value("max_depth", cfg.learner.forest.tree.max_depth);
                cfg.learner.forest.tree.min_samples_leaf = jl["forest"].value(
                    "min_samples_leaf", cfg.learner.forest.tree.min_samples_leaf);
            }
        }
        if (j.contains("impute")) {
            cfg.impute.k = j["impute"].value("k", cfg.impute.k);
            std::string w = j["impute"].value("weighting", std::string("uniform"));
            if (w == "uniform")
                cfg.impute.weighting = ImputeConfig::Weighting::Uniform;
            else if (w == "inverse_distance")
                cfg.impute.weighting = ImputeConfig::Weighting::InverseDistance;
            else
                throw ConfigError("unknown impute weighting '" + w + "'");
        }
        cfg.impute_combined = j.value("impute_combined", cfg.impute_combined);
        if (j.contains("sfs")) {
            cfg.sfs.enabled = j["sfs"].value("enabled", cfg.sfs.enabled);
            cfg.sfs.k = j["sfs"].value("k", cfg.sfs.k);
            cfg.sfs.search_n_trees = j["sfs"].value("search_n_trees", cfg.sfs.search_n_trees);
            cfg.sfs.feature_set = j["sfs"].value("feature_set", cfg.sfs.feature_set);
        }
        if (j.contains("inspect")) {
            cfg.inspect.enabled = j["inspect"].value("enabled", cfg.inspect.enabled);
            cfg.inspect.importance_repeats =
                j["inspect"].value("importance_repeats", cfg.inspect.importance_repeats);
            cfg.inspect.pd_features = j["inspect"].value("pd_features", cfg.inspect.pd_features);
        }
        cfg.seed = j.value("seed", cfg.seed);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: parse failure in '" + path + "': " + e.what());
    }
    return from_json(j);
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

}  // namespace detail

// One feature set made learner-ready: encoded matrix, aligned labels, and the
// split that every downstream consumer must respect.
struct SetData {
    std::string name;
    Matrix X;
    std::vector<std::string> feature_names;
    CohortLabels labels;
    SplitAssignment split;
    nlohmann::ordered_json impute_report;  // null unless the set was imputed
    std::vector<std::string> notes;
};

struct CellResult {
    std::string task;
    std::string feature_set;
    std::string learner;
    bool skipped = false;
    std::string skip_reason;
    std::vector<int> subset;  // empty means all features of the set
    std::map<std::string, double> metrics;
    ConfusionMatrix confusion;
    nlohmann::ordered_json importance;           // null when not computed
    nlohmann::ordered_json partial_dependence;   // null when not computed

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["task"] = task;
        j["feature_set"] = feature_set;
        j["learner"] = learner;
        j["skipped"] = skipped;
        if (skipped) {
            j["skip_reason"] = skip_reason;
            return j;
        }
        if (!subset.empty()) j["subset"] = subset;
        j["metrics"] = metrics;
        j["confusion"] = confusion.to_json();
        if (!importance.is_null()) j["importance"] = importance;
        if (!partial_dependence.is_null()) j["partial_dependence"] = partial_dependence;
        return j;
    }

    static CellResult from_json(const nlohmann::ordered_json& j) {
        CellResult c;
        c.task = j.at("task").get<std::string>();
        c.feature_set = j.at("feature_set").get<std::string>();
        c.learner = j.at("learner").get<std::string>();
        c.skipped = j.value("skipped", false);
        if (c.skipped) {
            c.skip_reason = j.value("skip_reason", std::string());
            return c;
        }
        if (j.contains("subset")) c.subset = j["subset"].get<std::vector<int>>();
        c.metrics = j.at("metrics").get<std::map<std::string, double>>();
        c.confusion.labels = j.at("confusion").at("labels").get<std::vector<std::string>>();
        c.confusion.counts =
            j.at("confusion").at("counts").get<std::vector<std::vector<long long>>>();
        if (j.contains("importance")) c.importance = j["importance"];
        if (j.contains("partial_dependence")) c.partial_dependence = j["partial_dependence"];
        return c;
    }
};

struct EvaluationReport {
    nlohmann::ordered_json config;
    std::string config_hash;
    nlohmann::ordered_json cohort;
    nlohmann::ordered_json load_reports = nlohmann::ordered_json::array();
    std::vector<CellResult> cells;
    std::map<std::string, nlohmann::ordered_json> selection;        // task -> trace
    std::map<std::string, std::vector<CellResult>> retrain;         // task -> cells
    std::vector<std::string> notes;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["config_hash"] = config_hash;
        j["config"] = config;
        j["cohort"] = cohort;
        if (!load_reports.empty()) j["load_reports"] = load_reports;
        j["cells"] = nlohmann::ordered_json::array();
        for (const auto& c : cells) j["cells"].push_back(c.to_json());
        nlohmann::ordered_json js = nlohmann::ordered_json::object();
        for (const auto& [task, trace] : selection) js[task] = trace;
        j["selection"] = std::move(js);
        nlohmann::ordered_json jr = nlohmann::ordered_json::object();
        for (const auto& [task, cells_t] : retrain) {
            jr[task] = nlohmann::ordered_json::array();
            for (const auto& c : cells_t) jr[task].push_back(c.to_json());
        }
        j["retrain"] = std::move(jr);
        j["notes"] = notes;
        return j;
    }

    static EvaluationReport from_json(const nlohmann::ordered_json& j) {
        EvaluationReport r;
        try {
            r.config_hash = j.value("config_hash", std::string());
            if (j.contains("config")) r.config = j["config"];
            if (j.contains("cohort")) r.cohort = j["cohort"];
            if (j.contains("load_reports")) r.load_reports = j["load_reports"];
            nlohmann::ordered_json cells = j.value("cells", nlohmann::ordered_json::array());
            for (const auto& jc : cells) r.cells.push_back(CellResult::from_json(jc));
            nlohmann::ordered_json sel = j.value("selection", nlohmann::ordered_json::object());
            for (const auto& [task, trace] : sel.items()) r.selection[task] = trace;
            nlohmann::ordered_json ret = j.value("retrain", nlohmann::ordered_json::object());
            for (const auto& [task, jcells] : ret.items())
                for (const auto& jc : jcells)
                    r.retrain[task].push_back(CellResult::from_json(jc));
            r.notes = j.value("notes", std::vector<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("report: ") + e.what());
        }
        return r;
    }
};

namespace detail {

// Seeds are a pure function of (root, task, set name, learner) so a subset
// retrain on the same set reuses the exact seeds of the full-feature cell.
inline std::uint64_t cell_seed(std::uint64_t root, TaskId task, const std::string& set_name,
                               LearnerKind learner) {
    return derive_seed(root, {static_cast<std::uint64_t>(task), fnv1a(set_name),
                              static_cast<std::uint64_t>(learner)});
}

inline std::vector<std::size_t> rows_with_label(const std::vector<std::size_t>& part,
                                                const std::vector<int>& y) {
    std::vector<std::size_t> out;
    for (std::size_t r : part)
        if (y[r] >= 0) out.push_back(r);
    return out;
}

inline std::vector<int> gather(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(y[r]);
    return out;
}

}  // namespace detail

// Trains and evaluates one (task, learner) cell on a prepared feature set,
// optionally restricted to a column subset. Training touches only the train
// partition; metrics come from the test partition.
inline CellResult evaluate_cell(const SetData& data, TaskId task, LearnerKind kind,
                                const LearnerConfig& lcfg, std::uint64_t root_seed,
                                const InspectConfig& inspect, unsigned threads,
                                const std::vector<int>& subset = {}) {
    CellResult cell;
    cell.task = task_name(task);
    cell.feature_set = data.name;
    cell.learner = learner_name(kind);
    cell.subset = subset;
    std::uint64_t seed = detail::cell_seed(root_seed, task, data.name, kind);

    Matrix X = subset.empty() ? data.X : data.X.select_cols(subset);
    std::vector<int> y = task_labels(data.labels, task);
    std::vector<std::size_t> train_rows = detail::rows_with_label(data.split.train, y);
    std::vector<std::size_t> test_rows = detail::rows_with_label(data.split.test, y);
    if (train_rows.empty() || test_rows.empty())
        throw DataError("evaluate_cell: empty train or test partition for task " + cell.task);
    Matrix X_train = X.select_rows(train_rows);
    Matrix X_test = X.select_rows(test_rows);
    std::vector<int> y_train = detail::gather(y, train_rows);
    std::vector<int> y_test = detail::gather(y, test_rows);

    PredictFn predict;
    Matrix probs_test;
    if (task == TaskId::T3) {
        std::vector<int> asd_train(y_train.size()), adhd_train(y_train.size());
        for (std::size_t i = 0; i < y_train.size(); ++i) {
            asd_train[i] = (y_train[i] == 1 || y_train[i] == 3) ? 1 : 0;
            adhd_train[i] = (y_train[i] == 2 || y_train[i] == 3) ? 1 : 0;
        }
        auto model = std::make_shared<MultilabelModel>(
            train_multilabel(X_train, asd_train, adhd_train, kind, lcfg, seed, threads));
        MultilabelPrediction pred = predict_multilabel(*model, X_test);
        probs_test = pred.joint;
        predict = [model](const Matrix& M) { return predict_multilabel(*model, M).joint; };

        cell.confusion = confusion(y_test, pred.class4, class4_names());
        cell.metrics["accuracy"] = accuracy(cell.confusion);
        SensSpec ss = sens_spec(cell.confusion, AverageMode::MacroOvr);
        cell.metrics["sensitivity"] = ss.sensitivity;
        cell.metrics["specificity"] = ss.specificity;
        std::vector<int> asd_test(y_test.size()), adhd_test(y_test.size());
        for (std::size_t i = 0; i < y_test.size(); ++i) {
            asd_test[i] = (y_test[i] == 1 || y_test[i] == 3) ? 1 : 0;
            adhd_test[i] = (y_test[i] == 2 || y_test[i] == 3) ? 1 : 0;
        }
        cell.metrics["auc_asd"] = roc_auc(pred.p_asd, asd_test);
        cell.metrics["auc_adhd"] = roc_auc(pred.p_adhd, adhd_test);
    } else {
        auto model = std::make_shared<TrainedModel>(
            train_binary(X_train, y_train, kind, lcfg, seed, threads));
        probs_test = predict_proba(*model, X_test);
        predict = [model](const Matrix& M) { return predict_proba(*model, M); };
        std::vector<int> pred(y_test.size());
        for (std::size_t i = 0; i < y_test.size(); ++i) pred[i] = probs_test(i, 1) > 0.5;
        cell.confusion = confusion(y_test, pred, {"negative", "positive"});
        cell.metrics["accuracy"] = accuracy(cell.confusion);
        SensSpec ss = sens_spec(cell.confusion, AverageMode::Binary);
        cell.metrics["sensitivity"] = ss.sensitivity;
        cell.metrics["specificity"] = ss.specificity;
        std::vector<double> scores(y_test.size());
        for (std::size_t i = 0; i < y_test.size(); ++i) scores[i] = probs_test(i, 1);
        cell.metrics["auc"] = roc_auc(scores, y_test);
    }

    if (inspect.enabled && inspect.importance_repeats > 0) {
        MetricFn metric;
        if (task == TaskId::T3) {
            metric = [](const Matrix& probs, const std::vector<int>& yt) {
                std::vector<double> pa(probs.rows), pd(probs.rows);
                std::vector<int> ya(probs.rows), yd(probs.rows);
                for (std::size_t i = 0; i < probs.rows; ++i) {
                    pa[i] = probs(i, 1) + probs(i, 3);
                    pd[i] = probs(i, 2) + probs(i, 3);
                    ya[i] = (yt[i] == 1 || yt[i] == 3) ? 1 : 0;
                    yd[i] = (yt[i] == 2 || yt[i] == 3) ? 1 : 0;
                }
                return 0.5 * (roc_auc(pa, ya) + roc_auc(pd, yd));
            };
        } else {
            metric = [](const Matrix& probs, const std::vector<int>& yt) {
                std::vector<double> s(probs.rows);
                for (std::size_t i = 0; i < probs.rows; ++i) s[i] = probs(i, 1);
                return roc_auc(s, yt);
            };
        }
        std::vector<double> imp =
            permutation_importance(predict, X_test, y_test, metric,
                                   inspect.importance_repeats,
                                   derive_seed(seed, {0x1297}), threads);
        std::vector<std::string> names;
        if (subset.empty())
            names = data.feature_names;
        else
            for (int c : subset) names.push_back(data.feature_names[static_cast<std::size_t>(c)]);
        nlohmann::ordered_json ji = nlohmann::ordered_json::object();
        for (std::size_t j = 0; j < imp.size(); ++j) ji[names[j]] = imp[j];
        cell.importance = std::move(ji);

        if (inspect.pd_features > 0) {
            std::vector<std::size_t> order(imp.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
            nlohmann::ordered_json jpd = nlohmann::ordered_json::object();
            std::size_t top = std::min<std::size_t>(
                static_cast<std::size_t>(inspect.pd_features), order.size());
            for (std::size_t i = 0; i < top; ++i) {
                std::size_t f = order[i];
                PartialDependence pd =
                    partial_dependence(predict, X_test, f, default_grid(X_test, f));
                nlohmann::ordered_json jf;
                jf["grid"] = pd.grid;
                jf["mean_probs"] = nlohmann::ordered_json::array();
                for (std::size_t g = 0; g < pd.mean_probs.rows; ++g) {
                    nlohmann::ordered_json row = nlohmann::ordered_json::array();
                    for (std::size_t c = 0; c < pd.mean_probs.cols; ++c)
                        row.push_back(pd.mean_probs(g, c));
                    jf["mean_probs"].push_back(std::move(row));
                }
                jpd[names[f]] = std::move(jf);
            }
            cell.partial_dependence = std::move(jpd);
        }
    }
    return cell;
}

// Re-evaluates the requested tasks restricted to a column subset of an already
// prepared feature set. With subset = all columns this reproduces the
// full-feature cells exactly, because cell seeds depend only on
// (root, task, set, learner).
inline std::vector<CellResult> retrain_on_subset(const SetData& data,
                                                 const std::vector<int>& subset,
                                                 const std::vector<TaskId>& tasks,
                                                 const std::vector<LearnerKind>& learners,
                                                 const LearnerConfig& lcfg,
                                                 std::uint64_t root_seed,
                                                 const InspectConfig& inspect,
                                                 unsigned threads) {
    if (subset.empty()) throw ConfigError("retrain_on_subset: subset must be nonempty");
    std::vector<CellResult> cells;
    for (TaskId task : tasks)
        for (LearnerKind kind : learners)
            cells.push_back(
                evaluate_cell(data, task, kind, lcfg, root_seed, inspect, threads, subset));
    return cells;
}

// Builds the learner-ready view of one feature set: complete-case for the
// group runs, split-then-impute (train donors only) for the combined run.
inline SetData prepare_set(const SurveyTable& table, const CohortLabels& labels,
                           const FeatureGroup& group, const ExperimentConfig& cfg,
                           const Codebook* codebook) {
    SetData data;
    data.name = group.name;
    bool impute = cfg.impute_combined && group.name == cfg.sfs.feature_set;

    if (impute) {
        SurveyTable sub = select_features(table, group, MissingPolicy::KeepMissing);
        data.labels = labels;
        std::vector<int> strata(sub.n_rows());
        for (std::size_t r = 0; r < sub.n_rows(); ++r) strata[r] = labels.class4[r];
        data.split = split_dataset(sub.n_rows(), strata,
                                   derive_seed(cfg.seed, {detail::fnv1a(group.name), 17}));
        auto [imputed, report] = impute_knn(sub, cfg.impute, data.split.train, cfg.threads);
        data.impute_report = report.to_json();
        auto [X, names] = encode_features(imputed, codebook);
        data.X = std::move(X);
        data.feature_names = std::move(names);
    } else {
        std::vector<std::size_t> kept;
        SurveyTable sub = select_features(table, group, MissingPolicy::CompleteCase, &kept);
        data.labels = take_label_rows(labels, kept);
        if (kept.size() < table.n_rows())
            data.notes.push_back("complete-case filtering kept " + std::to_string(kept.size()) +
                                 " of " + std::to_string(table.n_rows()) + " rows");
        std::vector<int> strata(sub.n_rows());
        for (std::size_t r = 0; r < sub.n_rows(); ++r) strata[r] = data.labels.class4[r];
        data.split = split_dataset(sub.n_rows(), strata,
                                   derive_seed(cfg.seed, {detail::fnv1a(group.name), 17}));
        auto [X, names] = encode_features(sub, codebook);
        data.X = std::move(X);
        data.feature_names = std::move(names);
    }
    for (const auto& w : data.split.warnings) data.notes.push_back("split: " + w);
    return data;
}

// Forward selection for one task on a prepared set, scored on the validation
// partition with a reduced-size forest.
inline SelectionTrace select_for_task(const SetData& data, TaskId task,
                                      const ExperimentConfig& cfg) {
    int p = static_cast<int>(data.X.cols);
    int k = std::min(cfg.sfs.k, p);
    ForestConfig search = cfg.learner.forest;
    search.n_trees = cfg.sfs.search_n_trees;

    std::vector<int> y = task_labels(data.labels, task);
    std::vector<std::size_t> train_rows = detail::rows_with_label(data.split.train, y);
    std::vector<std::size_t> val_rows = detail::rows_with_label(data.split.val, y);
    Matrix X_train = data.X.select_rows(train_rows);
    Matrix X_val = data.X.select_rows(val_rows);
    std::vector<int> y_train = detail::gather(y, train_rows);
    std::vector<int> y_val = detail::gather(y, val_rows);

    SubsetScorer scorer;
    if (task == TaskId::T3) {
        auto head = [](const std::vector<int>& yy, int bit) {
            std::vector<int> out(yy.size());
            for (std::size_t i = 0; i < yy.size(); ++i)
                out[i] = (yy[i] == bit || yy[i] == 3) ? 1 : 0;
            return out;
        };
        scorer = make_multilabel_forest_scorer(X_train, head(y_train, 1), head(y_train, 2),
                                               X_val, head(y_val, 1), head(y_val, 2), search);
    } else {
        scorer = make_forest_auc_scorer(X_train, y_train, X_val, y_val, search);
    }
    std::uint64_t sfs_seed = derive_seed(cfg.seed, {0x5f5, static_cast<std::uint64_t>(task)});
    SelectionTrace trace = sfs_forward(p, k, scorer, sfs_seed, data.feature_names, cfg.threads);
    trace.scorer = task == TaskId::T3 ? "mean_head_roc_auc" : "roc_auc";
    trace.learner_config = {{"learner", "forest"},
                            {"n_trees", search.n_trees},
                            {"final_n_trees", cfg.learner.forest.n_trees}};
    return trace;
}

struct WorkflowResult {
    EvaluationReport report;
    nlohmann::ordered_json run_meta;  // timings and host facts, kept out of the report
};

inline WorkflowResult run_workflow(const ExperimentConfig& cfg) {
    cfg.validate();
    auto wall_start = std::chrono::steady_clock::now();
    WorkflowResult result;
    EvaluationReport& report = result.report;
    report.config = cfg.to_json();
    // Where the report lands and how many workers ran are execution details,
    // not experiment identity; keeping them out makes reruns byte-identical.
    report.config.erase("output_dir");
    report.config.erase("threads");
    report.config_hash = detail::hex64(detail::fnv1a(report.config.dump()));
    nlohmann::ordered_json timings = nlohmann::ordered_json::object();

    SurveyTable table;
    CohortLabels labels;
    Codebook codebook;
    const Codebook* cb = nullptr;
    if (cfg.source == "synthetic") {
        auto [t, l] = generate_synthetic(cfg.synthetic);
        std::tie(table, labels) = filter_complete_targets(t, l);
        codebook = reference_codebook();
        cb = &codebook;
    } else {
        codebook = Codebook::from_file(cfg.real.codebook_path);
        cb = &codebook;
        std::vector<SurveyTable> parts;
        for (const auto& [path, year] : cfg.real.files) {
            LoadReport lr;
            parts.push_back(load_table(path, codebook, year, &lr));
            nlohmann::ordered_json jl = lr.to_json();
            jl["path"] = path;
            jl["year"] = year;
            report.load_reports.push_back(std::move(jl));
        }
        SurveyTable merged = concat_tables(parts);
        CohortLabels raw =
            derive_labels(merged, cfg.real.asd_item, cfg.real.adhd_item, cfg.real.aux_items);
        std::tie(table, labels) = filter_complete_targets(merged, raw);
    }

    DemographicColumns demo =
        cfg.source == "synthetic" ? DemographicColumns{} : cfg.real.demographics;
    try {
        report.cohort = summarize_cohort(table, labels, demo).to_json();
    } catch (const DataError& e) {
        report.notes.push_back(std::string("cohort summary unavailable: ") + e.what());
    }

    std::map<std::string, SetData> prepared;
    for (const auto& group : cfg.feature_sets) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            prepared.emplace(group.name, prepare_set(table, labels, group, cfg, cb));
            for (const auto& note : prepared.at(group.name).notes)
                report.notes.push_back(group.name + ": " + note);
        } catch (const std::exception& e) {
            for (TaskId task : cfg.tasks)
                for (LearnerKind kind : cfg.learners) {
                    CellResult cell;
                    cell.task = task_name(task);
                    cell.feature_set = group.name;
                    cell.learner = learner_name(kind);
                    cell.skipped = true;
                    cell.skip_reason = e.what();
                    report.cells.push_back(std::move(cell));
                }
            continue;
        }
        timings["prepare_" + group.name] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const SetData& data = prepared.at(group.name);
        if (!data.impute_report.is_null()) {
            nlohmann::ordered_json ji = data.impute_report;
            ji["feature_set"] = group.name;
            report.notes.push_back(group.name + ": imputed with train-partition donors");
            report.load_reports.push_back(std::move(ji));
        }

        for (TaskId task : cfg.tasks)
            for (LearnerKind kind : cfg.learners) {
                auto c0 = std::chrono::steady_clock::now();
                CellResult cell;
                try {
                    cell = evaluate_cell(data, task, kind, cfg.learner, cfg.seed, cfg.inspect,
                                         cfg.threads);
                } catch (const std::exception& e) {
                    cell.task = task_name(task);
                    cell.feature_set = group.name;
                    cell.learner = learner_name(kind);
                    cell.skipped = true;
                    cell.skip_reason = e.what();
                }
                timings["cell_" + cell.task + "_" + group.name + "_" + cell.learner] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
                report.cells.push_back(std::move(cell));
            }
    }

    if (cfg.sfs.enabled && prepared.count(cfg.sfs.feature_set)) {
        const SetData& data = prepared.at(cfg.sfs.feature_set);
        for (TaskId task : cfg.tasks) {
            auto s0 = std::chrono::steady_clock::now();
            try {
                SelectionTrace trace = select_for_task(data, task, cfg);
                report.selection[task_name(task)] = trace.to_json();
                report.retrain[task_name(task)] =
                    retrain_on_subset(data, trace.subset, {task}, cfg.learners, cfg.learner,
                                      cfg.seed, cfg.inspect, cfg.threads);
            } catch (const std::exception& e) {
                report.notes.push_back("sfs " + task_name(task) + " skipped: " + e.what());
            }
            timings["sfs_" + task_name(task)] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
        }
    }

    result.run_meta["seed"] = cfg.seed;
    result.run_meta["threads"] = cfg.threads;
    result.run_meta["timings_seconds"] = std::move(timings);
    result.run_meta["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    auto now = std::chrono::system_clock::now();
    result.run_meta["finished_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    return result;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("emit_report: write failed for '" + path.string() + "'");
}

inline std::string format_metric(const std::map<std::string, double>& metrics,
                                 const std::string& key) {
    auto it = metrics.find(key);
    if (it == metrics.end()) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << it->second;
    return out.str();
}

}  // namespace detail

// Writes report.json, a plain-text summary table, and plot-data CSVs under
// out_dir. Returns the list of files written. Timestamps never enter these
// files; callers persist run_meta separately.
inline std::vector<std::string> emit_report(const EvaluationReport& report,
                                            const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root / "plots", ec);
    if (ec) throw std::runtime_error("emit_report: cannot create '" + out_dir + "'");
    std::vector<std::string> written;

    detail::write_file(root / "report.json", report.to_json().dump(2) + "\n");
    written.push_back((root / "report.json").string());

    std::ostringstream summary;
    summary << std::left << std::setw(6) << "task" << std::setw(12) << "set" << std::setw(10)
            << "learner" << std::setw(10) << "acc" << std::setw(10) << "sens" << std::setw(10)
            << "spec" << std::setw(10) << "auc" << std::setw(10) << "auc_asd" << std::setw(10)
            << "auc_adhd" << "\n";
    auto emit_row = [&](const CellResult& c, const char* tag) {
        summary << std::left << std::setw(6) << c.task << std::setw(12)
                << (std::string(c.feature_set) + tag) << std::setw(10) << c.learner;
        if (c.skipped) {
            summary << "skipped: " << c.skip_reason << "\n";
            return;
        }
        for (const char* key : {"accuracy", "sensitivity", "specificity", "auc", "auc_asd",
                                "auc_adhd"})
            summary << std::setw(10) << detail::format_metric(c.metrics, key);
        summary << "\n";
    };
    for (const auto& c : report.cells) emit_row(c, "");
    for (const auto& [task, cells_t] : report.retrain)
        for (const auto& c : cells_t) emit_row(c, "*");
    if (!report.retrain.empty()) summary << "\n* retrained on the selected feature subset\n";
    detail::write_file(root / "summary.txt", summary.str());
    written.push_back((root / "summary.txt").string());

    std::ostringstream csv;
    csv << "task,feature_set,learner,subset,metric,value\n";
    auto emit_csv = [&](const CellResult& c, bool sub) {
        if (c.skipped) return;
        for (const auto& [k, v] : c.metrics) {
            csv << c.task << "," << c.feature_set << "," << c.learner << ","
                << (sub ? "selected" : "all") << "," << k << ",";
            csv << std::setprecision(17) << v << "\n";
        }
    };
    for (const auto& c : report.cells) emit_csv(c, false);
    for (const auto& [task, cells_t] : report.retrain)
        for (const auto& c : cells_t) emit_csv(c, true);
    detail::write_file(root / "plots" / "metrics.csv", csv.str());
    written.push_back((root / "plots" / "metrics.csv").string());

    for (const auto& [task, trace] : report.selection) {
        std::ostringstream sel;
        sel << "subset_size,feature,score\n";
        int size = 0;
        for (const auto& step : trace.at("steps"))
            sel << ++size << "," << step.at("name").get<std::string>() << ","
                << std::setprecision(17) << step.at("score").get<double>() << "\n";
        fs::path p = root / "plots" / ("selection_" + task + ".csv");
        detail::write_file(p, sel.str());
        written.push_back(p.string());
    }

    auto emit_inspect = [&](const CellResult& c, const std::string& suffix) {
        if (c.skipped || c.importance.is_null()) return;
        std::ostringstream imp;
        imp << "feature,importance\n";
        for (const auto& [name, v] : c.importance.items())
            imp << name << "," << std::setprecision(17) << v.get<double>() << "\n";
        fs::path p = root / "plots" /
                     ("importance_" + c.task + "_" + c.feature_set + "_" + c.learner + suffix +
                      ".csv");
        detail::write_file(p, imp.str());
        written.push_back(p.string());
        if (c.partial_dependence.is_null()) return;
        std::ostringstream pd;
        pd << "feature,grid,class,mean_prob\n";
        for (const auto& [name, jf] : c.partial_dependence.items()) {
            const auto& grid = jf.at("grid");
            const auto& probs = jf.at("mean_probs");
            for (std::size_t g = 0; g < grid.size(); ++g)
                for (std::size_t cls = 0; cls < probs[g].size(); ++cls)
                    pd << name << "," << std::setprecision(17) << grid[g].get<double>() << ","
                       << cls << "," << probs[g][cls].get<double>() << "\n";
        }
        fs::path pp = root / "plots" /
                      ("pd_" + c.task + "_" + c.feature_set + "_" + c.learner + suffix + ".csv");
        detail::write_file(pp, pd.str());
        written.push_back(pp.string());
    };
    for (const auto& c : report.cells) emit_inspect(c, "");
    for (const auto& [task, cells_t] : report.retrain)
        for (const auto& c : cells_t) emit_inspect(c, "_selected");

    return written;
}

}  // namespace surveyml
