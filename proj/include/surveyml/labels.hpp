#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "surveyml/class4.hpp"
#include "surveyml/errors.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

// Per-row derived diagnostic labels. Flag vectors hold 1 (yes), 0 (no) or
// -1 (answer missing); class4 is -1 wherever either primary flag is missing.
struct CohortLabels {
    std::vector<std::int8_t> asd;
    std::vector<std::int8_t> adhd;
    std::vector<std::int8_t> class4;
    std::vector<std::string> aux_names;
    std::vector<std::vector<std::int8_t>> aux;  // parallel to aux_names

    std::size_t n_rows() const { return asd.size(); }

    // All targets (primary and auxiliary) answered for this row.
    bool complete(std::size_t r) const {
        if (asd[r] < 0 || adhd[r] < 0) return false;
        for (const auto& a : aux)
            if (a[r] < 0) return false;
        return true;
    }

    // True when the row has any listed condition (used by the task builders).
    bool any_condition(std::size_t r) const {
        if (asd[r] == 1 || adhd[r] == 1) return true;
        for (const auto& a : aux)
            if (a[r] == 1) return true;
        return false;
    }
};

namespace detail {

inline std::int8_t yes_no_at(const SurveyTable& t, std::size_t r, int col,
                             const std::string& item) {
    if (t.is_missing(r, static_cast<std::size_t>(col))) return -1;
    double v = t.values(r, static_cast<std::size_t>(col));
    if (v == 1.0) return 1;
    if (v == 0.0) return 0;
    throw DataError("derive_labels: item '" + item + "' holds code " + std::to_string(v) +
                    " at row " + std::to_string(r) + "; expected yes(1)/no(0)/missing");
}

}  // namespace detail

// Derives condition flags from ever-told yes/no question items. Missingness is
// data here; exclusion happens in filter_complete_targets.
inline CohortLabels derive_labels(const SurveyTable& table, const std::string& asd_item,
                                  const std::string& adhd_item,
                                  const std::vector<std::string>& aux_items) {
    int asd_col = table.require_col(asd_item);
    int adhd_col = table.require_col(adhd_item);
    std::vector<int> aux_cols;
    for (const auto& item : aux_items) aux_cols.push_back(table.require_col(item));

    CohortLabels labels;
    std::size_t n = table.n_rows();
    labels.asd.resize(n);
    labels.adhd.resize(n);
    labels.class4.resize(n);
    labels.aux_names = aux_items;
    labels.aux.assign(aux_items.size(), std::vector<std::int8_t>(n));
    for (std::size_t r = 0; r < n; ++r) {
        labels.asd[r] = detail::yes_no_at(table, r, asd_col, asd_item);
        labels.adhd[r] = detail::yes_no_at(table, r, adhd_col, adhd_item);
        labels.class4[r] =
            (labels.asd[r] < 0 || labels.adhd[r] < 0)
                ? static_cast<std::int8_t>(-1)
                : static_cast<std::int8_t>(
                      class4_from_flags(labels.asd[r] == 1, labels.adhd[r] == 1));
        for (std::size_t a = 0; a < aux_cols.size(); ++a)
            labels.aux[a][r] = detail::yes_no_at(table, r, aux_cols[a], aux_items[a]);
    }
    return labels;
}

inline CohortLabels take_label_rows(const CohortLabels& labels,
                                    const std::vector<std::size_t>& idx) {
    CohortLabels out;
    out.aux_names = labels.aux_names;
    out.aux.resize(labels.aux.size());
    for (std::size_t r : idx) {
        out.asd.push_back(labels.asd[r]);
        out.adhd.push_back(labels.adhd[r]);
        out.class4.push_back(labels.class4[r]);
        for (std::size_t a = 0; a < labels.aux.size(); ++a)
            out.aux[a].push_back(labels.aux[a][r]);
    }
    return out;
}

// Drops every row missing any target label (primary or auxiliary condition).
inline std::pair<SurveyTable, CohortLabels> filter_complete_targets(
    const SurveyTable& table, const CohortLabels& labels) {
    if (labels.n_rows() != table.n_rows())
        throw DataError("filter_complete_targets: labels/table row mismatch");
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        if (labels.complete(r)) keep.push_back(r);
    if (keep.empty())
        throw DataError("filter_complete_targets: empty cohort after excluding rows with "
                        "missing target labels");
    return {take_rows(table, keep), take_label_rows(labels, keep)};
}

}  // namespace surveyml
