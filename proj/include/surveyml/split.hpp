#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "surveyml/errors.hpp"
#include "surveyml/rng.hpp"

namespace surveyml {

// Stratified 8:1:1 assignment. Each stratum's (train, val, test) sizes come
// from largest-remainder apportionment, so every stratum is off by at most one
// row from exact proportionality. Strata with fewer than 3 rows go wholly to
// train with a warning.
struct SplitAssignment {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::array<std::size_t, 3> apportion_811(std::size_t n) {
    const double props[3] = {0.8, 0.1, 0.1};
    std::array<std::size_t, 3> sizes{};
    double fracs[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double q = static_cast<double>(n) * props[i];
        sizes[i] = static_cast<std::size_t>(q);
        fracs[i] = q - static_cast<double>(sizes[i]);
        assigned += sizes[i];
    }
    // Hand out remaining rows by largest fractional part; ties favour train,
    // then val.
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fracs[a] > fracs[b]; });
    for (std::size_t r = 0; r < n - assigned; ++r) ++sizes[order[r % 3]];
    return sizes;
}

}  // namespace detail

inline SplitAssignment split_dataset(std::size_t n_rows, const std::vector<int>& strata,
                                     std::uint64_t seed) {
    if (n_rows < 10) throw DataError("split_dataset: need at least 10 rows");
    if (strata.size() != n_rows)
        throw DataError("split_dataset: strata/row count mismatch");
    SplitAssignment split;
    split.seed = seed;

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < n_rows; ++r) groups[strata[r]].push_back(r);

    for (auto& [stratum, rows] : groups) {
        if (rows.size() < 3) {
            split.warnings.push_back("stratum " + std::to_string(stratum) + " has " +
                                     std::to_string(rows.size()) +
                                     " rows; assigned wholly to train");
            split.train.insert(split.train.end(), rows.begin(), rows.end());
            continue;
        }
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(stratum)}));
        rng.shuffle(rows);
        auto sizes = detail::apportion_811(rows.size());
        split.train.insert(split.train.end(), rows.begin(), rows.begin() + sizes[0]);
        split.val.insert(split.val.end(), rows.begin() + sizes[0],
                         rows.begin() + sizes[0] + sizes[1]);
        split.test.insert(split.test.end(), rows.begin() + sizes[0] + sizes[1], rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace surveyml
