#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surveyml/errors.hpp"
#include "surveyml/parallel.hpp"
#include "surveyml/table.hpp"

namespace surveyml {

struct ImputeConfig {
    int k = 5;
    enum class Weighting { Uniform, InverseDistance };
    Weighting weighting = Weighting::Uniform;
};

struct ImputeReport {
    std::map<std::string, std::size_t> imputed_cells;   // per column
    std::map<std::string, std::size_t> donor_shortfalls;  // cells with < k donors

    nlohmann::ordered_json to_json() const {
        return {{"imputed_cells", imputed_cells}, {"donor_shortfalls", donor_shortfalls}};
    }
};

// Euclidean distance over mutually observed coordinates, rescaled by the
// observed fraction: sqrt((D / d_obs) * sum of squared differences). Rows
// sharing no observed coordinate have no defined distance. The rescaling
// breaks the triangle inequality; only symmetry is guaranteed.
inline std::optional<double> masked_distance(std::span<const double> a,
                                             std::span<const std::uint8_t> mask_a,
                                             std::span<const double> b,
                                             std::span<const std::uint8_t> mask_b) {
    std::size_t d = a.size();
    std::size_t d_obs = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (mask_a[j] || mask_b[j]) continue;
        ++d_obs;
        double diff = a[j] - b[j];
        sq += diff * diff;
    }
    if (d_obs == 0) return std::nullopt;
    return std::sqrt(static_cast<double>(d) / static_cast<double>(d_obs) * sq);
}

inline std::optional<double> masked_distance(const SurveyTable& t, std::size_t row_a,
                                             std::size_t row_b) {
    std::size_t p = t.n_cols();
    return masked_distance(t.values.row(row_a),
                           std::span<const std::uint8_t>(t.mask.data() + row_a * p, p),
                           t.values.row(row_b),
                           std::span<const std::uint8_t>(t.mask.data() + row_b * p, p));
}

// kNN imputation: each missing cell becomes the (weighted) mean of its column
// over the k nearest donor rows that observe the column. Ties at the k-th
// distance break toward the lower row index. When fewer than k eligible donors
// exist, all of them are used and a shortfall is recorded.
inline std::pair<SurveyTable, ImputeReport> impute_knn(
    const SurveyTable& table, const ImputeConfig& cfg = {},
    const std::vector<std::size_t>& donor_rows = {}, unsigned threads = 1) {
    if (cfg.k < 1) throw ConfigError("impute_knn: k must be >= 1");
    std::size_t n = table.n_rows(), p = table.n_cols();

    std::vector<std::size_t> donors = donor_rows;
    if (donors.empty()) {
        donors.resize(n);
        std::iota(donors.begin(), donors.end(), 0);
    }
    if (static_cast<std::size_t>(cfg.k) >= n)
        throw ConfigError("impute_knn: k must be smaller than the row count");

    for (std::size_t c = 0; c < p; ++c) {
        std::size_t observed = 0;
        for (std::size_t r : donors)
            if (!table.is_missing(r, c)) ++observed;
        if (observed < static_cast<std::size_t>(cfg.k))
            throw DataError("impute_knn: column '" + table.columns[c] + "' has only " +
                            std::to_string(observed) + " observed donor values, need " +
                            std::to_string(cfg.k));
    }
    for (std::size_t r = 0; r < n; ++r) {
        bool all_missing = true;
        for (std::size_t c = 0; c < p; ++c)
            if (!table.is_missing(r, c)) {
                all_missing = false;
                break;
            }
        if (all_missing)
            throw DataError("impute_knn: row " + std::to_string(r) + " has no observed cells");
    }

    SurveyTable out = table;
    std::vector<ImputeReport> partials(n);
    parallel_for(n, threads, [&](std::size_t r) {
        std::vector<std::size_t> missing_cols;
        for (std::size_t c = 0; c < p; ++c)
            if (table.is_missing(r, c)) missing_cols.push_back(c);
        if (missing_cols.empty()) return;

        // All donor distances for this row, computed once.
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(donors.size());
        for (std::size_t d : donors) {
            if (d == r) continue;
            auto m = masked_distance(table, r, d);
            if (m) dist.emplace_back(*m, d);
        }
        std::sort(dist.begin(), dist.end());

        for (std::size_t c : missing_cols) {
            double weight_sum = 0.0, value_sum = 0.0;
            int used = 0;
            bool exact = false;
            for (const auto& [d, donor] : dist) {
                if (table.is_missing(donor, c)) continue;
                if (cfg.weighting == ImputeConfig::Weighting::InverseDistance) {
                    // Zero-distance donors dominate: average exactly those.
                    if (d == 0.0) {
                        if (!exact) {
                            exact = true;
                            weight_sum = value_sum = 0.0;
                            used = 0;
                        }
                        value_sum += table.values(donor, c);
                        weight_sum += 1.0;
                    } else if (!exact) {
                        value_sum += table.values(donor, c) / d;
                        weight_sum += 1.0 / d;
                    }
                } else {
                    value_sum += table.values(donor, c);
                    weight_sum += 1.0;
                }
                if (++used == cfg.k) break;
            }
            if (used == 0)
                throw DataError("impute_knn: no eligible donor for row " + std::to_string(r) +
                                ", column '" + table.columns[c] + "'");
            if (used < cfg.k) ++partials[r].donor_shortfalls[table.columns[c]];
            out.values(r, c) = value_sum / weight_sum;
            out.set_missing(r, c, false);
            ++partials[r].imputed_cells[table.columns[c]];
        }
    });

    ImputeReport report;
    for (const auto& partial : partials) {
        for (auto [col, count] : partial.imputed_cells) report.imputed_cells[col] += count;
        for (auto [col, count] : partial.donor_shortfalls)
            report.donor_shortfalls[col] += count;
    }
    return {std::move(out), std::move(report)};
}

}  // namespace surveyml
