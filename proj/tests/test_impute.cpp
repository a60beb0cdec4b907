#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "surveyml/impute.hpp"
#include "surveyml/rng.hpp"

using namespace surveyml;

namespace {

SurveyTable make_table(std::size_t n, std::size_t p) {
    SurveyTable t;
    for (std::size_t c = 0; c < p; ++c) t.columns.push_back("c" + std::to_string(c));
    t.values = Matrix(n, p);
    t.mask.assign(n * p, 0);
    return t;
}

// Brute-force oracle: recompute every imputed cell from the definition,
// all pairwise distances written out longhand.
double oracle_cell(const SurveyTable& t, std::size_t r, std::size_t c,
                   const ImputeConfig& cfg, const std::vector<std::size_t>& donors) {
    std::size_t p = t.n_cols();
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t d : donors) {
        if (d == r) continue;
        std::size_t shared = 0;
        double sq = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (t.is_missing(r, j) || t.is_missing(d, j)) continue;
            ++shared;
            double diff = t.values(r, j) - t.values(d, j);
            sq += diff * diff;
        }
        if (shared == 0) continue;
        dist.emplace_back(
            std::sqrt(static_cast<double>(p) / static_cast<double>(shared) * sq), d);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::pair<double, double>> picked;  // (distance, value)
    for (const auto& [d, donor] : dist) {
        if (t.is_missing(donor, c)) continue;
        picked.emplace_back(d, t.values(donor, c));
        if (static_cast<int>(picked.size()) == cfg.k) break;
    }
    REQUIRE_FALSE(picked.empty());
    if (cfg.weighting == ImputeConfig::Weighting::InverseDistance) {
        bool any_zero = false;
        for (const auto& [d, v] : picked) any_zero = any_zero || d == 0.0;
        double num = 0.0, den = 0.0;
        for (const auto& [d, v] : picked) {
            if (any_zero) {
                if (d == 0.0) {
                    num += v;
                    den += 1.0;
                }
            } else {
                num += v / d;
                den += 1.0 / d;
            }
        }
        return num / den;
    }
    double sum = 0.0;
    for (const auto& [d, v] : picked) sum += v;
    return sum / static_cast<double>(picked.size());
}

}  // namespace

TEST_CASE("masked_distance: observed-fraction rescaling and undefined pairs") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> b = {2.0, 2.0, 5.0, 4.0};
    std::vector<std::uint8_t> none = {0, 0, 0, 0};
    auto d = masked_distance(a, none, b, none);
    REQUIRE(d.has_value());
    REQUIRE(*d == Catch::Approx(std::sqrt(5.0)));

    std::vector<std::uint8_t> half = {0, 1, 0, 1};
    d = masked_distance(a, half, b, none);
    REQUIRE(*d == Catch::Approx(std::sqrt(4.0 / 2.0 * 5.0)));

    std::vector<std::uint8_t> left = {1, 1, 0, 0};
    std::vector<std::uint8_t> right = {0, 0, 1, 1};
    REQUIRE_FALSE(masked_distance(a, left, b, right).has_value());
}

TEST_CASE("impute_knn: matches the brute-force oracle exactly") {
    Rng rng(404);
    for (int inst = 0; inst < 12; ++inst) {
        std::size_t n = 20 + rng.bounded(181);  // <= 200
        std::size_t p = 2 + rng.bounded(5);
        SurveyTable t = make_table(n, p);
        for (double& v : t.values.data)
            v = static_cast<double>(rng.bounded(5)) + rng.uniform();
        // sprinkle missingness; keep row 0 and the first k rows fully observed
        // so every column retains enough donors
        ImputeConfig cfg;
        cfg.k = 1 + static_cast<int>(rng.bounded(5));
        cfg.weighting = inst % 2 ? ImputeConfig::Weighting::InverseDistance
                                 : ImputeConfig::Weighting::Uniform;
        for (std::size_t r = static_cast<std::size_t>(cfg.k); r < n; ++r)
            for (std::size_t c = 0; c < p; ++c)
                if (rng.uniform() < 0.12 && c + 1 < p)  // last column stays observed
                    t.set_missing(r, c, true);

        auto [out, report] = impute_knn(t, cfg);
        std::vector<std::size_t> donors(n);
        std::iota(donors.begin(), donors.end(), 0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c) {
                if (t.is_missing(r, c)) {
                    REQUIRE_FALSE(out.is_missing(r, c));
                    REQUIRE(out.values(r, c) == oracle_cell(t, r, c, cfg, donors));
                } else {
                    REQUIRE(out.values(r, c) == t.values(r, c));
                }
            }
        std::size_t total_imputed = 0;
        for (const auto& [col, count] : report.imputed_cells) total_imputed += count;
        std::size_t expected = 0;
        for (std::uint8_t m : t.mask) expected += m;
        REQUIRE(total_imputed == expected);
    }
}

TEST_CASE("impute_knn: donor restriction keeps non-donor rows out") {
    SurveyTable t = make_table(12, 2);
    for (std::size_t r = 0; r < 12; ++r) {
        t.values(r, 0) = static_cast<double>(r % 3);
        t.values(r, 1) = r < 10 ? 1.0 : 100.0;  // rows 10, 11 are poisoned
    }
    t.set_missing(3, 1, true);
    std::vector<std::size_t> donors = {0, 1, 2, 4, 5, 6, 7, 8, 9};
    ImputeConfig cfg;
    cfg.k = 3;
    auto [out, report] = impute_knn(t, cfg, donors);
    REQUIRE(out.values(3, 1) == 1.0);
}

TEST_CASE("impute_knn: zero-distance donors dominate under inverse distance") {
    SurveyTable t = make_table(6, 2);
    for (std::size_t r = 0; r < 6; ++r) {
        t.values(r, 0) = r < 2 ? 5.0 : static_cast<double>(10 + r);
        t.values(r, 1) = static_cast<double>(10 * r);
    }
    t.values(0, 0) = 5.0;  // rows 0 and 1 coincide on the observed coordinate
    t.values(1, 0) = 5.0;
    t.set_missing(0, 1, true);
    ImputeConfig cfg;
    cfg.k = 4;
    cfg.weighting = ImputeConfig::Weighting::InverseDistance;
    auto [out, report] = impute_knn(t, cfg);
    REQUIRE(out.values(0, 1) == 10.0);  // exactly row 1's value, no blending
}

TEST_CASE("impute_knn: shortfall recorded when eligible donors run out") {
    // c1 has three observed donors overall, but row 0 shares coordinates with
    // only two of them and just one of those observes c1
    SurveyTable t = make_table(5, 3);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) t.values(r, c) = static_cast<double>(r + c);
    t.set_missing(0, 1, true);  // row 0 observes only c0
    t.set_missing(0, 2, true);
    t.set_missing(1, 0, true);  // rows 1, 2 observe only c1, c2
    t.set_missing(2, 0, true);
    t.set_missing(4, 1, true);  // row 4 observes c0, c2
    ImputeConfig cfg;
    cfg.k = 2;
    auto [out, report] = impute_knn(t, cfg);
    // row 0's only in-reach donor observing c1 is row 3
    REQUIRE(report.donor_shortfalls.at("c1") == 1);
    REQUIRE_FALSE(out.any_missing());
}

TEST_CASE("impute_knn: error cases") {
    SurveyTable t = make_table(5, 2);
    for (double& v : t.values.data) v = 1.0;
    SECTION("k below one") {
        ImputeConfig cfg;
        cfg.k = 0;
        REQUIRE_THROWS_AS(impute_knn(t, cfg), ConfigError);
    }
    SECTION("k not smaller than the row count") {
        ImputeConfig cfg;
        cfg.k = 5;
        REQUIRE_THROWS_AS(impute_knn(t, cfg), ConfigError);
    }
    SECTION("column with too few observed donors") {
        SurveyTable u = t;
        for (std::size_t r = 0; r < 4; ++r) u.set_missing(r, 1, true);
        ImputeConfig cfg;
        cfg.k = 2;
        REQUIRE_THROWS_AS(impute_knn(u, cfg), DataError);
    }
    SECTION("fully missing row") {
        SurveyTable u = t;
        u.set_missing(2, 0, true);
        u.set_missing(2, 1, true);
        ImputeConfig cfg;
        cfg.k = 2;
        REQUIRE_THROWS_AS(impute_knn(u, cfg), DataError);
    }
}

TEST_CASE("impute_knn: thread count does not change the result") {
    Rng rng(88);
    SurveyTable t = make_table(80, 4);
    for (double& v : t.values.data) v = rng.normal();
    for (std::size_t r = 10; r < 80; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            if (rng.uniform() < 0.1) t.set_missing(r, c, true);
    auto [a, ra] = impute_knn(t, {}, {}, 1);
    auto [b, rb] = impute_knn(t, {}, {}, 4);
    REQUIRE(a.values == b.values);
    REQUIRE(ra.imputed_cells == rb.imputed_cells);
}

TEST_CASE("impute_knn: beats column-mean imputation on correlated data") {
    // latent factor drives all columns; kNN can exploit the correlation while
    // a column mean cannot
    int knn_wins = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        std::size_t n = 200, p = 4;
        SurveyTable truth = make_table(n, p);
        for (std::size_t r = 0; r < n; ++r) {
            double z = rng.normal();
            for (std::size_t c = 0; c < p; ++c)
                truth.values(r, c) = z + 0.3 * rng.normal();
        }
        SurveyTable masked = truth;
        std::vector<std::pair<std::size_t, std::size_t>> holes;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c)
                if (rng.uniform() < 0.10) {
                    masked.set_missing(r, c, true);
                    holes.emplace_back(r, c);
                }

        auto [knn, report] = impute_knn(masked, {});
        double knn_sq = 0.0, mean_sq = 0.0;
        std::vector<double> col_mean(p, 0.0);
        std::vector<std::size_t> col_n(p, 0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c)
                if (!masked.is_missing(r, c)) {
                    col_mean[c] += masked.values(r, c);
                    ++col_n[c];
                }
        for (std::size_t c = 0; c < p; ++c) col_mean[c] /= static_cast<double>(col_n[c]);
        for (auto [r, c] : holes) {
            double target = truth.values(r, c);
            knn_sq += (knn.values(r, c) - target) * (knn.values(r, c) - target);
            mean_sq += (col_mean[c] - target) * (col_mean[c] - target);
        }
        if (knn_sq < mean_sq) ++knn_wins;
    }
    REQUIRE(knn_wins >= 18);
}
