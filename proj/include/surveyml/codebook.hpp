#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"

namespace surveyml {

enum class ColumnKind { Ordinal, Categorical, Continuous, Binary };

inline ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "ordinal") return ColumnKind::Ordinal;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "continuous") return ColumnKind::Continuous;
    if (s == "binary") return ColumnKind::Binary;
    throw ConfigError("codebook: unknown column kind '" + s + "'");
}

inline std::string column_kind_to_string(ColumnKind k) {
    switch (k) {
        case ColumnKind::Ordinal: return "ordinal";
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Continuous: return "continuous";
        case ColumnKind::Binary: return "binary";
    }
    return "?";
}

struct CodebookColumn {
    std::string name;    // logical feature name
    std::string source;  // dataset column header
    ColumnKind kind = ColumnKind::Ordinal;
    std::set<int> valid_codes;                            // empty -> use range / any
    std::optional<std::pair<double, double>> valid_range;
    std::set<int> missing_codes;
    std::map<int, int> recode;  // applied after domain checks
    bool one_hot = false;

    bool code_valid(double v) const {
        if (!valid_codes.empty())
            return v == static_cast<double>(static_cast<long long>(v)) &&
                   valid_codes.count(static_cast<int>(v)) > 0;
        if (valid_range) return v >= valid_range->first && v <= valid_range->second;
        return true;
    }
};

// Declarative mapping from logical feature names to dataset columns, value
// domains, and missing-value sentinels. Sentinels are per-column because NSCH
// style surveys use item-specific codes.
struct Codebook {
    std::vector<CodebookColumn> columns;
    // year -> logical name -> source column override
    std::map<std::string, std::map<std::string, std::string>> year_aliases;

    const CodebookColumn* find(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }

    const CodebookColumn& require(const std::string& name) const {
        const CodebookColumn* c = find(name);
        if (!c) throw ConfigError("codebook: unknown column '" + name + "'");
        return *c;
    }

    std::string source_for(const std::string& name, const std::string& year) const {
        auto yit = year_aliases.find(year);
        if (yit != year_aliases.end()) {
            auto cit = yit->second.find(name);
            if (cit != yit->second.end()) return cit->second;
        }
        return require(name).source;
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto& c : columns) {
            if (!seen.insert(c.name).second)
                throw ConfigError("codebook: duplicate logical name '" + c.name + "'");
            for (int m : c.missing_codes) {
                if (c.valid_codes.count(m) > 0)
                    throw ConfigError("codebook: column '" + c.name +
                                      "' lists code " + std::to_string(m) +
                                      " as both valid and missing");
                if (c.valid_codes.empty() && c.valid_range &&
                    static_cast<double>(m) >= c.valid_range->first &&
                    static_cast<double>(m) <= c.valid_range->second)
                    throw ConfigError("codebook: column '" + c.name + "' missing code " +
                                      std::to_string(m) + " falls inside valid range");
            }
        }
    }

    static Codebook from_json(const nlohmann::json& j) {
        Codebook cb;
        for (const auto& jc : j.at("columns")) {
            CodebookColumn c;
            c.name = jc.at("name").get<std::string>();
            c.source = jc.value("source", c.name);
            c.kind = column_kind_from_string(jc.value("kind", std::string("ordinal")));
            if (jc.contains("valid_codes"))
                for (int v : jc.at("valid_codes")) c.valid_codes.insert(v);
            if (jc.contains("valid_range")) {
                auto r = jc.at("valid_range");
                c.valid_range = {r.at(0).get<double>(), r.at(1).get<double>()};
            }
            if (jc.contains("missing_codes"))
                for (int v : jc.at("missing_codes")) c.missing_codes.insert(v);
            if (jc.contains("recode"))
                for (auto it = jc.at("recode").begin(); it != jc.at("recode").end(); ++it)
                    c.recode[std::stoi(it.key())] = it.value().get<int>();
            c.one_hot = jc.value("one_hot", false);
            cb.columns.push_back(std::move(c));
        }
        if (j.contains("year_aliases"))
            for (auto yit = j.at("year_aliases").begin(); yit != j.at("year_aliases").end(); ++yit)
                for (auto cit = yit.value().begin(); cit != yit.value().end(); ++cit)
                    cb.year_aliases[yit.key()][cit.key()] = cit.value().get<std::string>();
        cb.validate();
        return cb;
    }

    static Codebook from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("codebook: cannot open '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("codebook: parse error in '" + path + "': " + e.what());
        }
        return from_json(j);
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["columns"] = nlohmann::ordered_json::array();
        for (const auto& c : columns) {
            nlohmann::ordered_json jc;
            jc["name"] = c.name;
            jc["source"] = c.source;
            jc["kind"] = column_kind_to_string(c.kind);
            if (!c.valid_codes.empty()) jc["valid_codes"] = c.valid_codes;
            if (c.valid_range)
                jc["valid_range"] = {c.valid_range->first, c.valid_range->second};
            if (!c.missing_codes.empty()) jc["missing_codes"] = c.missing_codes;
            if (!c.recode.empty()) {
                nlohmann::ordered_json jr;
                for (auto [k, v] : c.recode) jr[std::to_string(k)] = v;
                jc["recode"] = std::move(jr);
            }
            if (c.one_hot) jc["one_hot"] = true;
            j["columns"].push_back(std::move(jc));
        }
        if (!year_aliases.empty()) j["year_aliases"] = year_aliases;
        return j;
    }
};

}  // namespace surveyml
