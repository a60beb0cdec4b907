// Command-line front end. Every subcommand wraps exactly one library
// operation; all heavy lifting lives in the headers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"
#include "surveyml/experiment.hpp"
#include "surveyml/model.hpp"

namespace {

using namespace surveyml;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

nlohmann::ordered_json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        nlohmann::ordered_json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("parse failure in '" + path + "': " + e.what());
    }
}

SurveyTable load_concat(const std::string& codebook_path,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& years,
                        nlohmann::ordered_json* reports) {
    if (inputs.size() != years.size())
        throw ConfigError("--input and --year must be given the same number of times");
    Codebook cb = Codebook::from_file(codebook_path);
    std::vector<SurveyTable> parts;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        LoadReport lr;
        parts.push_back(load_table(inputs[i], cb, years[i], &lr));
        if (reports) {
            nlohmann::ordered_json jl = lr.to_json();
            jl["path"] = inputs[i];
            jl["year"] = years[i];
            reports->push_back(std::move(jl));
        }
    }
    return concat_tables(parts);
}

struct CommonOverrides {
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string output_dir;
    std::string config_path;

    // Precedence: command-line flag > config file > built-in default.
    std::string apply(ExperimentConfig& cfg) const {
        std::string seed_source = config_path.empty() ? "default" : "config";
        if (seed_opt && seed_opt->count()) {
            cfg.seed = seed;
            seed_source = "flag";
        }
        if (threads_opt && threads_opt->count()) cfg.threads = threads;
        if (out_opt && out_opt->count()) cfg.output_dir = output_dir;
        return seed_source;
    }
};

ExperimentConfig load_config(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(path);
}

void add_common(CLI::App* cmd, CommonOverrides& ov, bool with_config = true) {
    if (with_config)
        cmd->add_option("--config", ov.config_path, "Experiment config file (JSON)");
    ov.seed_opt = cmd->add_option("--seed", ov.seed, "Root seed (overrides config)");
    ov.threads_opt = cmd->add_option("--threads", ov.threads, "Worker thread cap");
    ov.out_opt = cmd->add_option("--output-dir", ov.output_dir, "Output directory");
}

void run_and_emit(const ExperimentConfig& cfg, const std::string& seed_source) {
    WorkflowResult result = run_workflow(cfg);
    std::vector<std::string> files = emit_report(result.report, cfg.output_dir);
    result.run_meta["seed_source"] = seed_source;
    write_text(fs::path(cfg.output_dir) / "run_meta.json", result.run_meta.dump(2) + "\n");
    for (const auto& f : files) std::cout << f << "\n";
    std::cout << (fs::path(cfg.output_dir) / "run_meta.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surveyml: survey-data diagnostic classification pipeline"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load survey CSVs under a codebook");
    std::string in_codebook;
    std::vector<std::string> in_inputs;
    std::vector<std::string> in_years;
    std::string in_out = "out";
    ingest->add_option("--codebook", in_codebook, "Codebook file (JSON)")->required();
    ingest->add_option("--input", in_inputs, "Input CSV (repeatable)")->required();
    ingest->add_option("--year", in_years, "Survey year per input (repeatable)")->required();
    ingest->add_option("--output-dir", in_out, "Output directory");
    ingest->callback([&] {
        nlohmann::ordered_json reports = nlohmann::ordered_json::array();
        SurveyTable t = load_concat(in_codebook, in_inputs, in_years, &reports);
        fs::create_directories(in_out);
        write_table_csv(t, (fs::path(in_out) / "table.csv").string());
        write_text(fs::path(in_out) / "load_report.json", reports.dump(2) + "\n");
        std::cout << "rows: " << t.n_rows() << "\n";
    });

    // summarize
    auto* summarize = app.add_subcommand("summarize", "Cohort demographics per derived class");
    std::string su_codebook, su_asd = "asd_ever", su_adhd = "adhd_ever", su_out = "out";
    std::string su_age = "age", su_sex = "sex", su_race = "race";
    std::vector<std::string> su_inputs, su_aux, su_years;
    summarize->add_option("--codebook", su_codebook, "Codebook file (JSON)")->required();
    summarize->add_option("--input", su_inputs, "Input CSV (repeatable)")->required();
    summarize->add_option("--year", su_years, "Survey year per input (repeatable)")->required();
    summarize->add_option("--asd-item", su_asd, "ASD ever-told item");
    summarize->add_option("--adhd-item", su_adhd, "ADHD ever-told item");
    summarize->add_option("--aux", su_aux, "Other condition item (repeatable)");
    summarize->add_option("--age-col", su_age, "Age column");
    summarize->add_option("--sex-col", su_sex, "Sex column");
    summarize->add_option("--race-col", su_race, "Race column");
    summarize->add_option("--output-dir", su_out, "Output directory");
    summarize->callback([&] {
        SurveyTable t = load_concat(su_codebook, su_inputs, su_years, nullptr);
        CohortLabels raw = derive_labels(t, su_asd, su_adhd, su_aux);
        auto [table, labels] = filter_complete_targets(t, raw);
        CohortSummary summary =
            summarize_cohort(table, labels, {su_age, su_sex, su_race});
        write_text(fs::path(su_out) / "cohort.json", summary.to_json().dump(2) + "\n");
        write_text(fs::path(su_out) / "cohort.txt", summary.render_text());
        std::cout << summary.render_text();
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic survey cohort");
    std::size_t sy_rows = 1000;
    std::uint64_t sy_seed = 1;
    std::string sy_spec, sy_out = "out";
    auto* sy_rows_opt = synth->add_option("--rows", sy_rows, "Row count");
    auto* sy_seed_opt = synth->add_option("--seed", sy_seed, "Generator seed");
    synth->add_option("--spec", sy_spec, "Generator spec file (JSON); flags override it");
    synth->add_option("--output-dir", sy_out, "Output directory");
    synth->callback([&] {
        SyntheticSpec spec = sy_spec.empty()
                                 ? default_synthetic_spec(sy_rows, sy_seed)
                                 : SyntheticSpec::from_json(read_json(sy_spec));
        if (sy_rows_opt->count()) spec.n_rows = sy_rows;
        if (sy_seed_opt->count()) spec.seed = sy_seed;
        auto [table, labels] = generate_synthetic(spec);
        fs::create_directories(sy_out);
        write_table_csv(table, (fs::path(sy_out) / "cohort.csv").string());
        write_text(fs::path(sy_out) / "codebook.json",
                   reference_codebook().to_json().dump(2) + "\n");
        write_text(fs::path(sy_out) / "spec.json", spec.to_json().dump(2) + "\n");
        std::cout << "rows: " << table.n_rows() << "\n";
    });

    // train
    auto* train = app.add_subcommand("train", "Train and score a single (task, set, learner) cell");
    CommonOverrides tr_ov;
    std::string tr_task = "T1", tr_set = "combined", tr_learner = "logistic";
    train->add_option("--task", tr_task, "Task id (T1|T2|T3)");
    train->add_option("--set", tr_set, "Feature set name");
    train->add_option("--learner", tr_learner, "Learner (logistic|tree|forest)");
    add_common(train, tr_ov);
    train->callback([&] {
        ExperimentConfig cfg = load_config(tr_ov.config_path);
        std::string seed_source = tr_ov.apply(cfg);
        cfg.tasks = {task_from_name(tr_task)};
        bool found = false;
        for (const auto& g : cfg.feature_sets)
            if (g.name == tr_set) {
                cfg.feature_sets = {g};
                found = true;
                break;
            }
        if (!found) throw ConfigError("feature set '" + tr_set + "' not in config");
        if (tr_learner == "logistic")
            cfg.learners = {LearnerKind::Logistic};
        else if (tr_learner == "tree")
            cfg.learners = {LearnerKind::Tree};
        else if (tr_learner == "forest")
            cfg.learners = {LearnerKind::Forest};
        else
            throw ConfigError("unknown learner '" + tr_learner + "'");
        cfg.sfs.enabled = false;
        run_and_emit(cfg, seed_source);
    });

    // select
    auto* select = app.add_subcommand("select", "Sequential forward feature selection");
    CommonOverrides se_ov;
    std::string se_task = "T1";
    int se_k = 0;
    select->add_option("--task", se_task, "Task id (T1|T2|T3)");
    select->add_option("--k", se_k, "Subset size (overrides config)");
    add_common(select, se_ov);
    select->callback([&] {
        ExperimentConfig cfg = load_config(se_ov.config_path);
        se_ov.apply(cfg);
        if (se_k > 0) cfg.sfs.k = se_k;
        TaskId task = task_from_name(se_task);

        SurveyTable table;
        CohortLabels labels;
        Codebook codebook = reference_codebook();
        if (cfg.source == "synthetic") {
            auto [t, l] = generate_synthetic(cfg.synthetic);
            std::tie(table, labels) = filter_complete_targets(t, l);
        } else {
            codebook = Codebook::from_file(cfg.real.codebook_path);
            nlohmann::ordered_json reports = nlohmann::ordered_json::array();
            std::vector<std::string> paths, years;
            for (const auto& [p, y] : cfg.real.files) {
                paths.push_back(p);
                years.push_back(y);
            }
            SurveyTable merged = load_concat(cfg.real.codebook_path, paths, years, &reports);
            CohortLabels raw =
                derive_labels(merged, cfg.real.asd_item, cfg.real.adhd_item, cfg.real.aux_items);
            std::tie(table, labels) = filter_complete_targets(merged, raw);
        }
        const FeatureGroup* group = nullptr;
        for (const auto& g : cfg.feature_sets)
            if (g.name == cfg.sfs.feature_set) group = &g;
        if (!group)
            throw ConfigError("sfs feature set '" + cfg.sfs.feature_set + "' not in config");
        SetData data = prepare_set(table, labels, *group, cfg, &codebook);
        SelectionTrace trace = select_for_task(data, task, cfg);

        fs::create_directories(cfg.output_dir);
        write_text(fs::path(cfg.output_dir) / ("selection_" + se_task + ".json"),
                   trace.to_json().dump(2) + "\n");
        std::ostringstream csv;
        csv << "subset_size,feature,score\n";
        for (std::size_t i = 0; i < trace.steps.size(); ++i)
            csv << i + 1 << "," << trace.steps[i].name << "," << std::setprecision(17)
                << trace.steps[i].score << "\n";
        write_text(fs::path(cfg.output_dir) / ("selection_" + se_task + ".csv"), csv.str());
        for (const auto& step : trace.steps) std::cout << step.name << "\n";
    });

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a survey CSV");
    std::string ev_model, ev_codebook, ev_input, ev_label, ev_out = "out";
    std::vector<std::string> ev_features;
    std::string ev_year;
    evaluate->add_option("--model", ev_model, "Model file (JSON)")->required();
    evaluate->add_option("--codebook", ev_codebook, "Codebook file (JSON)")->required();
    evaluate->add_option("--input", ev_input, "Input CSV")->required();
    evaluate->add_option("--year", ev_year, "Survey year");
    evaluate->add_option("--features", ev_features, "Feature column, in model order (repeatable)")
        ->required();
    evaluate->add_option("--label-col", ev_label, "Binary label column (enables metrics)");
    evaluate->add_option("--output-dir", ev_out, "Output directory");
    evaluate->callback([&] {
        Codebook cb = Codebook::from_file(ev_codebook);
        SurveyTable t = load_table(ev_input, cb, ev_year);
        // Complete-case over features plus the label, so predictions and
        // metrics line up row for row.
        FeatureGroup group{"evaluate", ev_features};
        if (!ev_label.empty()) group.members.push_back(ev_label);
        SurveyTable sub = select_features(t, group, MissingPolicy::CompleteCase);
        SurveyTable feats = take_cols(sub, ev_features);
        TrainedModel model = model_from_json(read_json(ev_model));
        Matrix probs = predict_proba(model, feats.values);

        std::ostringstream csv;
        csv << "row";
        for (std::size_t c = 0; c < probs.cols; ++c) csv << ",p" << c;
        csv << ",predicted\n";
        std::vector<int> pred(probs.rows);
        std::vector<double> scores(probs.rows);
        for (std::size_t r = 0; r < probs.rows; ++r) {
            pred[r] = probs(r, 1) > 0.5;
            scores[r] = probs(r, 1);
            csv << r;
            for (std::size_t c = 0; c < probs.cols; ++c)
                csv << "," << std::setprecision(17) << probs(r, c);
            csv << "," << pred[r] << "\n";
        }
        write_text(fs::path(ev_out) / "predictions.csv", csv.str());
        std::cout << (fs::path(ev_out) / "predictions.csv").string() << "\n";
        if (!ev_label.empty()) {
            int col = sub.require_col(ev_label);
            std::vector<int> y(sub.n_rows());
            for (std::size_t r = 0; r < sub.n_rows(); ++r)
                y[r] = sub.values(r, static_cast<std::size_t>(col)) != 0.0;
            ConfusionMatrix cm = confusion(y, pred, {"negative", "positive"});
            SensSpec ss = sens_spec(cm, AverageMode::Binary);
            nlohmann::ordered_json jm;
            jm["accuracy"] = accuracy(cm);
            jm["sensitivity"] = ss.sensitivity;
            jm["specificity"] = ss.specificity;
            jm["auc"] = roc_auc(scores, y);
            jm["confusion"] = cm.to_json();
            write_text(fs::path(ev_out) / "metrics.json", jm.dump(2) + "\n");
            std::cout << (fs::path(ev_out) / "metrics.json").string() << "\n";
        }
    });

    // run
    auto* run = app.add_subcommand("run", "Execute the full configured workflow");
    CommonOverrides ru_ov;
    std::string ru_write_default;
    run->add_option("--write-default-config", ru_write_default,
                    "Write the built-in default config to this path and exit");
    add_common(run, ru_ov);
    run->callback([&] {
        if (!ru_write_default.empty()) {
            write_text(ru_write_default, ExperimentConfig{}.to_json().dump(2) + "\n");
            std::cout << ru_write_default << "\n";
            return;
        }
        ExperimentConfig cfg = load_config(ru_ov.config_path);
        std::string seed_source = ru_ov.apply(cfg);
        run_and_emit(cfg, seed_source);
    });

    // report
    auto* report = app.add_subcommand("report", "Re-render summary and plot data from a report");
    std::string re_report, re_out = "out";
    report->add_option("--report", re_report, "Existing report.json")->required();
    report->add_option("--output-dir", re_out, "Output directory");
    report->callback([&] {
        EvaluationReport rep = EvaluationReport::from_json(read_json(re_report));
        for (const auto& f : emit_report(rep, re_out)) std::cout << f << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
