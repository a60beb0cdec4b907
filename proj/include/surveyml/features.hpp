#pragma once

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "surveyml/codebook.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/matrix.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

struct FeatureGroup {
    std::string name;
    std::vector<std::string> members;

    void validate() const {
        if (members.empty())
            throw ConfigError("feature group '" + name + "' has no members");
        std::set<std::string> seen;
        for (const auto& m : members)
            if (!seen.insert(m).second)
                throw ConfigError("feature group '" + name + "' lists '" + m + "' twice");
    }
};

enum class MissingPolicy { CompleteCase, KeepMissing };

// Projects the group's columns. CompleteCase additionally drops rows with any
// missing member, feeding the group-specific runs; KeepMissing retains the
// mask for the imputation path.
inline SurveyTable select_features(const SurveyTable& table, const FeatureGroup& group,
                                   MissingPolicy policy,
                                   std::vector<std::size_t>* kept_rows = nullptr) {
    group.validate();
    SurveyTable projected = take_cols(table, group.members);
    if (policy == MissingPolicy::KeepMissing) {
        if (kept_rows) {
            kept_rows->resize(projected.n_rows());
            std::iota(kept_rows->begin(), kept_rows->end(), 0);
        }
        return projected;
    }
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < projected.n_rows(); ++r) {
        bool ok = true;
        for (std::size_t c = 0; c < projected.n_cols(); ++c)
            if (projected.is_missing(r, c)) {
                ok = false;
                break;
            }
        if (ok) keep.push_back(r);
    }
    if (keep.empty())
        throw DataError("select_features: empty cohort after complete-case filtering on group '" +
                        group.name + "'");
    if (kept_rows) *kept_rows = keep;
    return take_rows(projected, keep);
}

// Expands codebook-flagged nominal columns into per-code indicators; all other
// columns pass through. Returns the dense learner matrix and its column names.
inline std::pair<Matrix, std::vector<std::string>> encode_features(
    const SurveyTable& table, const Codebook* codebook = nullptr) {
    std::vector<std::pair<int, int>> layout;  // (source col, code or -1)
    std::vector<std::string> names;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        const CodebookColumn* cb = codebook ? codebook->find(table.columns[c]) : nullptr;
        if (cb && cb->one_hot && !cb->valid_codes.empty()) {
            for (int code : cb->valid_codes) {
                layout.emplace_back(static_cast<int>(c), code);
                names.push_back(table.columns[c] + "=" + std::to_string(code));
            }
        } else {
            layout.emplace_back(static_cast<int>(c), -1);
            names.push_back(table.columns[c]);
        }
    }
    Matrix X(table.n_rows(), layout.size());
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t j = 0; j < layout.size(); ++j) {
            auto [c, code] = layout[j];
            double v = table.values(r, static_cast<std::size_t>(c));
            X(r, j) = code < 0 ? v : (v == static_cast<double>(code) ? 1.0 : 0.0);
        }
    return {std::move(X), std::move(names)};
}

}  // namespace surveyml
