#pragma once

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/class4.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/labels.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

struct DemographicColumns {
    std::string age = "age";
    std::string sex = "sex";
    std::string race = "race";
};

// Cohort descriptive statistics: per class (plus Overall), mean age and
// count/percentage breakdowns by sex and race code.
struct CohortSummary {
    struct Breakdown {
        std::map<int, std::size_t> counts;  // demographic code -> count
        std::map<int, double> percent;
    };
    struct ClassStats {
        std::size_t n = 0;
        double mean_age = 0.0;
        Breakdown sex;
        Breakdown race;
    };
    // Keys: "Overall", "AutismOnly", "AdhdOnly", "Both".
    std::map<std::string, ClassStats> classes;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        for (const char* key : {"Overall", "AutismOnly", "AdhdOnly", "Both"}) {
            auto it = classes.find(key);
            if (it == classes.end()) continue;
            const ClassStats& s = it->second;
            nlohmann::ordered_json js;
            js["n"] = s.n;
            js["mean_age"] = s.mean_age;
            for (auto [name, bd] : {std::pair<const char*, const Breakdown*>{"sex", &s.sex},
                                    {"race", &s.race}}) {
                nlohmann::ordered_json jb;
                for (auto [code, count] : bd->counts) {
                    jb[std::to_string(code)] = {{"count", count},
                                                {"percent", bd->percent.at(code)}};
                }
                js[name] = std::move(jb);
            }
            j[key] = std::move(js);
        }
        return j;
    }

    std::string render_text() const {
        std::ostringstream out;
        out << std::fixed << std::setprecision(1);
        for (const char* key : {"Overall", "AutismOnly", "AdhdOnly", "Both"}) {
            auto it = classes.find(key);
            if (it == classes.end()) continue;
            const ClassStats& s = it->second;
            out << key << " (n=" << s.n << ")\n";
            out << "  mean age: " << s.mean_age << "\n";
            out << "  sex:";
            for (auto [code, count] : s.sex.counts)
                out << "  " << code << "=" << count << " (" << s.sex.percent.at(code) << "%)";
            out << "\n  race:";
            for (auto [code, count] : s.race.counts)
                out << "  " << code << "=" << count << " (" << s.race.percent.at(code) << "%)";
            out << "\n";
        }
        return out.str();
    }
};

inline CohortSummary summarize_cohort(const SurveyTable& table, const CohortLabels& labels,
                                      const DemographicColumns& demo = {}) {
    int age_col = table.require_col(demo.age);
    int sex_col = table.require_col(demo.sex);
    int race_col = table.require_col(demo.race);
    if (labels.n_rows() != table.n_rows())
        throw DataError("summarize_cohort: labels/table row mismatch");

    auto class_key = [&](std::size_t r) -> const char* {
        switch (labels.class4[r]) {
            case static_cast<int>(Class4::AutismOnly): return "AutismOnly";
            case static_cast<int>(Class4::AdhdOnly): return "AdhdOnly";
            case static_cast<int>(Class4::Both): return "Both";
            default: return nullptr;
        }
    };

    CohortSummary summary;
    std::map<std::string, double> age_sum;
    std::map<std::string, std::size_t> age_n;
    auto add_row = [&](const std::string& key, std::size_t r) {
        CohortSummary::ClassStats& s = summary.classes[key];
        ++s.n;
        if (!table.is_missing(r, static_cast<std::size_t>(age_col))) {
            age_sum[key] += table.values(r, static_cast<std::size_t>(age_col));
            ++age_n[key];
        }
        if (!table.is_missing(r, static_cast<std::size_t>(sex_col)))
            ++s.sex.counts[static_cast<int>(table.values(r, static_cast<std::size_t>(sex_col)))];
        if (!table.is_missing(r, static_cast<std::size_t>(race_col)))
            ++s.race.counts[static_cast<int>(table.values(r, static_cast<std::size_t>(race_col)))];
    };

    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        add_row("Overall", r);
        if (const char* key = class_key(r)) add_row(key, r);
    }
    for (auto& [key, s] : summary.classes) {
        s.mean_age = age_n[key] > 0 ? age_sum[key] / static_cast<double>(age_n[key]) : 0.0;
        for (auto* bd : {&s.sex, &s.race}) {
            std::size_t total = 0;
            for (auto [code, count] : bd->counts) total += count;
            for (auto [code, count] : bd->counts)
                bd->percent[code] = total > 0 ? 100.0 * static_cast<double>(count) /
                                                    static_cast<double>(total)
                                              : 0.0;
        }
    }
    return summary;
}

}  // namespace surveyml
