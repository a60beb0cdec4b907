#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/class4.hpp"
#include "surveyml/codebook.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/features.hpp"
#include "surveyml/labels.hpp"
#include "surveyml/rng.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

// One latent sub-population: a diagnostic class (or a flavour of the None
// class) together with its demographic and feature response profile.
struct ProfileSpec {
    std::string name;
    double prevalence = 0.0;
    bool asd = false;
    bool adhd = false;
    std::map<std::string, double> aux_rates;  // condition name -> probability
    bool force_aux = false;  // guarantee at least one auxiliary condition
    double age_mean = 9.0;
    double age_sd = 3.5;
    double male_prob = 0.5;
    std::vector<double> feature_means;  // parallel to SyntheticSpec::feature_names
    double feature_sd_scale = 1.0;      // dispersion multiplier for this profile
};

struct SyntheticSpec {
    std::size_t n_rows = 1000;
    std::uint64_t seed = 1;
    std::vector<std::string> feature_names;
    std::vector<double> feature_sd;            // per feature
    std::vector<double> feature_missing_rate;  // per feature, MCAR
    int domain_min = 1;
    int domain_max = 5;
    std::vector<std::string> aux_names;
    std::vector<ProfileSpec> profiles;
    std::vector<double> race_probs;  // categories coded 1..k, shared across profiles

    void validate() const {
        double total = 0.0;
        for (const auto& p : profiles) {
            total += p.prevalence;
            if (p.prevalence < 0.0)
                throw ConfigError("synthetic: negative prevalence for '" + p.name + "'");
            if (p.feature_means.size() != feature_names.size())
                throw ConfigError("synthetic: profile '" + p.name +
                                  "' feature_means length mismatch");
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ConfigError("synthetic: profile prevalences sum to " + std::to_string(total));
        if (feature_sd.size() != feature_names.size() ||
            feature_missing_rate.size() != feature_names.size())
            throw ConfigError("synthetic: per-feature vectors must match feature_names");
        for (double m : feature_missing_rate)
            if (m < 0.0 || m >= 1.0)
                throw ConfigError("synthetic: missing rates must lie in [0, 1)");
    }

    nlohmann::ordered_json to_json() const;
    static SyntheticSpec from_json(const nlohmann::json& j);
};

inline nlohmann::ordered_json SyntheticSpec::to_json() const {
    nlohmann::ordered_json j;
    j["n_rows"] = n_rows;
    j["seed"] = seed;
    j["feature_names"] = feature_names;
    j["feature_sd"] = feature_sd;
    j["feature_missing_rate"] = feature_missing_rate;
    j["domain_min"] = domain_min;
    j["domain_max"] = domain_max;
    j["aux_names"] = aux_names;
    j["race_probs"] = race_probs;
    j["profiles"] = nlohmann::ordered_json::array();
    for (const auto& p : profiles) {
        nlohmann::ordered_json jp;
        jp["name"] = p.name;
        jp["prevalence"] = p.prevalence;
        jp["asd"] = p.asd;
        jp["adhd"] = p.adhd;
        jp["aux_rates"] = p.aux_rates;
        jp["force_aux"] = p.force_aux;
        jp["age_mean"] = p.age_mean;
        jp["age_sd"] = p.age_sd;
        jp["male_prob"] = p.male_prob;
        jp["feature_means"] = p.feature_means;
        jp["feature_sd_scale"] = p.feature_sd_scale;
        j["profiles"].push_back(std::move(jp));
    }
    return j;
}

inline SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    spec.n_rows = j.at("n_rows").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    spec.feature_sd = j.at("feature_sd").get<std::vector<double>>();
    spec.feature_missing_rate = j.at("feature_missing_rate").get<std::vector<double>>();
    spec.domain_min = j.at("domain_min").get<int>();
    spec.domain_max = j.at("domain_max").get<int>();
    spec.aux_names = j.at("aux_names").get<std::vector<std::string>>();
    spec.race_probs = j.at("race_probs").get<std::vector<double>>();
    for (const auto& jp : j.at("profiles")) {
        ProfileSpec p;
        p.name = jp.at("name").get<std::string>();
        p.prevalence = jp.at("prevalence").get<double>();
        p.asd = jp.at("asd").get<bool>();
        p.adhd = jp.at("adhd").get<bool>();
        p.aux_rates = jp.at("aux_rates").get<std::map<std::string, double>>();
        p.force_aux = jp.value("force_aux", false);
        p.age_mean = jp.at("age_mean").get<double>();
        p.age_sd = jp.at("age_sd").get<double>();
        p.male_prob = jp.at("male_prob").get<double>();
        p.feature_means = jp.at("feature_means").get<std::vector<double>>();
        p.feature_sd_scale = jp.value("feature_sd_scale", 1.0);
        spec.profiles.push_back(std::move(p));
    }
    spec.validate();
    return spec;
}

// Column order of generated tables: age, sex, race, behavioral features,
// asd_ever, adhd_ever, auxiliary condition items.
inline std::pair<SurveyTable, CohortLabels> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::size_t n_feat = spec.feature_names.size();
    SurveyTable t;
    t.columns = {"age", "sex", "race"};
    for (const auto& f : spec.feature_names) t.columns.push_back(f);
    t.columns.push_back("asd_ever");
    t.columns.push_back("adhd_ever");
    for (const auto& a : spec.aux_names) t.columns.push_back(a);
    std::size_t p = t.columns.size();
    t.values = Matrix(spec.n_rows, p);
    t.mask.assign(spec.n_rows * p, 0);
    t.sources.push_back("synthetic (seed " + std::to_string(spec.seed) + ")");
    t.row_source.assign(spec.n_rows, 0);

    CohortLabels labels;
    labels.asd.resize(spec.n_rows);
    labels.adhd.resize(spec.n_rows);
    labels.class4.resize(spec.n_rows);
    labels.aux_names = spec.aux_names;
    labels.aux.assign(spec.aux_names.size(),
                      std::vector<std::int8_t>(spec.n_rows, 0));

    Rng rng(spec.seed);
    for (std::size_t r = 0; r < spec.n_rows; ++r) {
        double u = rng.uniform();
        std::size_t pi = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.profiles.size(); ++i) {
            acc += spec.profiles[i].prevalence;
            if (u < acc) {
                pi = i;
                break;
            }
            pi = i;  // numeric tail lands in the last profile
        }
        const ProfileSpec& profile = spec.profiles[pi];

        double age = profile.age_mean + profile.age_sd * rng.normal();
        t.values(r, 0) = std::min(17.0, std::max(0.0, std::round(age)));
        t.values(r, 1) = rng.uniform() < profile.male_prob ? 1.0 : 2.0;  // 1=male 2=female
        double ru = rng.uniform();
        double racc = 0.0;
        std::size_t race = spec.race_probs.size();
        for (std::size_t i = 0; i < spec.race_probs.size(); ++i) {
            racc += spec.race_probs[i];
            if (ru < racc) {
                race = i + 1;
                break;
            }
        }
        t.values(r, 2) = static_cast<double>(race == 0 ? 1 : race);

        for (std::size_t f = 0; f < n_feat; ++f) {
            double v = std::round(profile.feature_means[f] +
                                  profile.feature_sd_scale * spec.feature_sd[f] * rng.normal());
            v = std::min(static_cast<double>(spec.domain_max),
                         std::max(static_cast<double>(spec.domain_min), v));
            t.values(r, 3 + f) = v;
        }

        labels.asd[r] = profile.asd ? 1 : 0;
        labels.adhd[r] = profile.adhd ? 1 : 0;
        labels.class4[r] =
            static_cast<std::int8_t>(class4_from_flags(profile.asd, profile.adhd));
        t.values(r, 3 + n_feat) = profile.asd ? 1.0 : 0.0;
        t.values(r, 4 + n_feat) = profile.adhd ? 1.0 : 0.0;
        bool any_aux = false;
        for (std::size_t a = 0; a < spec.aux_names.size(); ++a) {
            auto it = profile.aux_rates.find(spec.aux_names[a]);
            double rate = it == profile.aux_rates.end() ? 0.0 : it->second;
            bool on = rng.uniform() < rate;
            any_aux = any_aux || on;
            labels.aux[a][r] = on ? 1 : 0;
            t.values(r, 5 + n_feat + a) = on ? 1.0 : 0.0;
        }
        if (profile.force_aux && !any_aux && !spec.aux_names.empty()) {
            labels.aux[0][r] = 1;
            t.values(r, 5 + n_feat) = 1.0;
        }

        // MCAR masking applies to behavioral features only, never to targets.
        for (std::size_t f = 0; f < n_feat; ++f)
            if (spec.feature_missing_rate[f] > 0.0 &&
                rng.uniform() < spec.feature_missing_rate[f])
                t.set_missing(r, 3 + f, true);
    }
    return {std::move(t), std::move(labels)};
}

// Behavioral feature vocabulary of the reference cohort, grouped the way the
// feature-set experiments consume them.
inline const std::vector<std::string>& reference_feature_names() {
    static const std::vector<std::string> names = {
        "difficulty_concentrating", "easily_distracted", "argues_too_much",
        "stays_calm", "finishes_tasks",
        "difficulty_making_friends", "plays_well", "shows_concern",
        "affectionate", "smiles_laughs",
        "bounces_back", "difficulty_coordination",
        "interest_curiosity", "recognizes_sounds", "recognizes_letters",
        "explains_things", "writes_name", "difficulty_walking"};
    return names;
}

inline const std::vector<std::string>& reference_aux_names() {
    static const std::vector<std::string> names = {
        "anxiety", "behavioral_problems", "learning_disability", "depression",
        "developmental_delay", "speech_disorder", "tourette", "intellectual_disability"};
    return names;
}

inline FeatureGroup reference_group1() {
    return {"group1",
            {"age", "sex", "difficulty_concentrating", "difficulty_walking",
             "interest_curiosity", "finishes_tasks", "stays_calm", "argues_too_much",
             "difficulty_making_friends"}};
}

inline FeatureGroup reference_group2() {
    return {"group2",
            {"age", "sex", "interest_curiosity", "difficulty_making_friends",
             "difficulty_coordination", "affectionate", "bounces_back", "smiles_laughs",
             "recognizes_sounds", "recognizes_letters", "explains_things", "writes_name",
             "easily_distracted", "plays_well", "shows_concern"}};
}

inline FeatureGroup reference_combined() {
    FeatureGroup g{"combined", reference_group1().members};
    for (const auto& m : reference_group2().members)
        if (std::find(g.members.begin(), g.members.end(), m) == g.members.end())
            g.members.push_back(m);
    return g;
}

// Reference cohort: class prevalences follow the published cohort counts
// (4315 / 22863 / 3770 over 270978); the None class splits into a clean
// sub-population and one carrying other behavioral-health conditions whose
// survey responses overlap the ADHD profile. That overlap is what makes the
// 4-way task much harder than the binary screens, while the binary negative
// class (no conditions at all) stays well separated.
inline SyntheticSpec default_synthetic_spec(std::size_t n_rows, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_rows = n_rows;
    spec.seed = seed;
    spec.feature_names = reference_feature_names();
    spec.aux_names = reference_aux_names();
    std::size_t nf = spec.feature_names.size();
    spec.feature_sd.assign(nf, 0.9);
    spec.feature_missing_rate.assign(nf, 0.02);
    for (const char* sparse : {"recognizes_sounds", "recognizes_letters",
                               "explains_things", "writes_name"})
        spec.feature_missing_rate[static_cast<std::size_t>(
            std::find(spec.feature_names.begin(), spec.feature_names.end(), sparse) -
            spec.feature_names.begin())] = 0.15;
    spec.race_probs = {0.771, 0.067, 0.009, 0.056, 0.0054, 0.082, 0.0096};

    const double p_autism = 4315.0 / 270978.0;
    const double p_adhd = 22863.0 / 270978.0;
    const double p_both = 3770.0 / 270978.0;
    const double p_none = 1.0 - p_autism - p_adhd - p_both;
    // The None class splits into a clean majority and three sub-populations
    // with other behavioral-health conditions whose survey responses shadow
    // the diagnostic classes to varying degrees.
    const double aux_adhd_share = 0.27;
    const double aux_asd_share = 0.0065;
    const double aux_severe_share = 0.0065;
    const double clean_share = 1.0 - aux_adhd_share - aux_asd_share - aux_severe_share;

    auto make_profile = [&](std::string name, double prev, bool asd, bool adhd,
                            double age_mean, double male_prob,
                            std::vector<double> means) {
        ProfileSpec p;
        p.name = std::move(name);
        p.prevalence = prev;
        p.asd = asd;
        p.adhd = adhd;
        p.age_mean = age_mean;
        p.male_prob = male_prob;
        p.feature_means = std::move(means);
        return p;
    };

    // Feature order: concentrating, distracted, argues, calm, finishes,
    // friends, plays_well, concern, affectionate, smiles, bounces, coord,
    // curiosity, sounds, letters, explains, writes, walking.
    ProfileSpec clean = make_profile(
        "none_clean", p_none * clean_share, false, false, 8.5, 0.505,
        {1.5, 1.6, 1.7, 4.2, 4.1, 1.4, 4.3, 4.2, 4.4, 4.5, 4.2, 1.3, 4.4, 3.5, 3.6, 3.8,
         3.9, 1.2});
    ProfileSpec adhd = make_profile(
        "adhd_only", p_adhd, false, true, 12.3, 0.657,
        {3.5, 3.6, 3.3, 2.5, 2.5, 2.2, 3.7, 3.8, 4.0, 4.1, 3.5, 1.9, 3.9, 3.3, 3.4, 3.5,
         3.7, 1.3});
    adhd.aux_rates = {{"behavioral_problems", 0.40}, {"anxiety", 0.35},
                      {"learning_disability", 0.30}, {"depression", 0.18},
                      {"developmental_delay", 0.12}, {"speech_disorder", 0.10},
                      {"tourette", 0.02}, {"intellectual_disability", 0.04}};
    ProfileSpec autism = make_profile(
        "autism_only", p_autism, true, false, 9.5, 0.775,
        {3.3, 3.2, 3.1, 2.7, 2.8, 4.5, 1.4, 1.5, 1.9, 2.6, 3.4, 2.4, 3.5, 3.1, 3.2, 3.0,
         3.5, 1.5});
    autism.aux_rates = {{"developmental_delay", 0.45}, {"speech_disorder", 0.50},
                        {"learning_disability", 0.30}, {"anxiety", 0.30},
                        {"behavioral_problems", 0.25}, {"intellectual_disability", 0.15},
                        {"depression", 0.08}, {"tourette", 0.02}};
    ProfileSpec both = make_profile(
        "both", p_both, true, true, 11.9, 0.795,
        {4.6, 4.6, 3.8, 1.4, 1.4, 4.4, 1.6, 1.8, 2.1, 2.6, 1.1, 4.7, 3.4, 3.0, 3.1, 2.9,
         3.4, 1.7});
    both.aux_rates = {{"behavioral_problems", 0.45}, {"anxiety", 0.40},
                      {"learning_disability", 0.40}, {"developmental_delay", 0.35},
                      {"speech_disorder", 0.35}, {"depression", 0.15},
                      {"intellectual_disability", 0.18}, {"tourette", 0.04}};
    // Behavioral responses identical to the ADHD class; only the reported
    // conditions differ.
    ProfileSpec aux_adhd = make_profile("none_other_adhd_like", p_none * aux_adhd_share,
                                        false, false, 12.3, 0.657, adhd.feature_means);
    aux_adhd.feature_sd_scale = 1.35;
    aux_adhd.force_aux = true;
    aux_adhd.aux_rates = {{"anxiety", 0.55}, {"behavioral_problems", 0.50},
                          {"learning_disability", 0.30}, {"depression", 0.28},
                          {"developmental_delay", 0.06}, {"speech_disorder", 0.08},
                          {"tourette", 0.02}, {"intellectual_disability", 0.03}};

    // Same pattern on the autism and comorbid profiles, but at a fraction of
    // the diagnosed groups' size rather than a multiple of it.
    ProfileSpec aux_asd = make_profile("none_other_asd_like", p_none * aux_asd_share,
                                       false, false, 9.5, 0.775, autism.feature_means);
    aux_asd.force_aux = true;
    aux_asd.aux_rates = {{"speech_disorder", 0.45}, {"developmental_delay", 0.40},
                         {"learning_disability", 0.35}, {"anxiety", 0.30},
                         {"behavioral_problems", 0.20}, {"depression", 0.10},
                         {"tourette", 0.03}, {"intellectual_disability", 0.06}};
    ProfileSpec aux_severe = make_profile("none_other_severe", p_none * aux_severe_share,
                                          false, false, 11.9, 0.795, both.feature_means);
    aux_severe.force_aux = true;
    aux_severe.aux_rates = {{"behavioral_problems", 0.55}, {"anxiety", 0.45},
                            {"depression", 0.35}, {"learning_disability", 0.35},
                            {"developmental_delay", 0.15}, {"speech_disorder", 0.15},
                            {"tourette", 0.04}, {"intellectual_disability", 0.08}};

    spec.profiles = {clean, aux_adhd, aux_asd, aux_severe, autism, adhd, both};
    return spec;
}

// Codebook describing the synthetic column layout, usable to round-trip the
// generated cohort through the CSV loader.
inline Codebook reference_codebook() {
    Codebook cb;
    auto add = [&](const std::string& name, ColumnKind kind) {
        CodebookColumn c;
        c.name = name;
        c.source = name;
        c.kind = kind;
        if (kind == ColumnKind::Ordinal)
            c.valid_codes = {1, 2, 3, 4, 5};
        else if (kind == ColumnKind::Binary)
            c.valid_codes = {0, 1};
        cb.columns.push_back(std::move(c));
    };
    CodebookColumn age;
    age.name = age.source = "age";
    age.kind = ColumnKind::Continuous;
    age.valid_range = {{0.0, 17.0}};
    cb.columns.push_back(age);
    CodebookColumn sex;
    sex.name = sex.source = "sex";
    sex.kind = ColumnKind::Categorical;
    sex.valid_codes = {1, 2};
    cb.columns.push_back(sex);
    CodebookColumn race;
    race.name = race.source = "race";
    race.kind = ColumnKind::Categorical;
    race.valid_codes = {1, 2, 3, 4, 5, 6, 7};
    race.one_hot = true;
    cb.columns.push_back(race);
    for (const auto& f : reference_feature_names()) add(f, ColumnKind::Ordinal);
    add("asd_ever", ColumnKind::Binary);
    add("adhd_ever", ColumnKind::Binary);
    for (const auto& a : reference_aux_names()) add(a, ColumnKind::Binary);
    cb.validate();
    return cb;
}

}  // namespace surveyml
