#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidar/rankstats.hpp"

#include "oracles.hpp"

using namespace lidar;

namespace {

PairedSeries series(std::vector<double> x, std::vector<double> y) {
    PairedSeries s;
    s.x = std::move(x);
    s.y = std::move(y);
    return s;
}

} // namespace

TEST_CASE("rank_values") {
    CHECK(rank_values(std::vector<double>{10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(rank_values(std::vector<double>{5, 5, 1}) == std::vector<double>{2.5, 2.5, 1});
    CHECK(rank_values(std::vector<double>{3, 1, 4, 1, 5}) ==
          std::vector<double>{3, 1.5, 4, 1.5, 5});
}

TEST_CASE("spearman basics") {
    CHECK(spearman(series({1, 2, 3}, {10, 20, 30})).coefficient == doctest::Approx(1.0));
    CHECK(spearman(series({1, 2, 3}, {30, 20, 10})).coefficient == doctest::Approx(-1.0));
    // 1 - 6*4/120 on the tie-free closed form
    CHECK(spearman(series({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5})).coefficient ==
          doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("spearman handles ties via midranks") {
    // ranks x = [1, 2.5, 2.5, 4], y = [1, 2, 3, 4]
    const CorrelationReport r = spearman(series({1, 2, 2, 3}, {1, 2, 3, 4}));
    CHECK(r.coefficient == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)).epsilon(1e-14));
    CHECK(r.tie_groups_x == 1);
    CHECK(r.tie_groups_y == 0);
}

TEST_CASE("spearman zero variance") {
    const CorrelationReport r = spearman(series({1, 1, 1}, {1, 2, 3}));
    CHECK(r.status == CorrStatus::zero_variance);
    CHECK(std::isnan(r.coefficient));
}

TEST_CASE("kendall basics") {
    const CorrelationReport up = kendall(series({1, 2, 3}, {1, 2, 3}));
    CHECK(up.coefficient == doctest::Approx(1.0));
    CHECK(up.concordant == 3);
    CHECK(up.discordant == 0);

    const CorrelationReport down = kendall(series({1, 2, 3}, {3, 2, 1}));
    CHECK(down.coefficient == doctest::Approx(-1.0));
    CHECK(down.concordant == 0);
    CHECK(down.discordant == 3);

    const CorrelationReport mixed =
        kendall(series({1, 2, 3, 4}, {1, 3, 2, 4}), CorrMethod::kendall_tau_a);
    CHECK(mixed.concordant == 5);
    CHECK(mixed.discordant == 1);
    CHECK(mixed.coefficient == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("kendall tau_b corrects for ties") {
    // C=5, D=0, one x-tied pair: tau_b = 5 / sqrt(6*5)
    const CorrelationReport r = kendall(series({1, 2, 2, 3}, {1, 2, 3, 4}));
    CHECK(r.coefficient == doctest::Approx(5.0 / std::sqrt(30.0)).epsilon(1e-14));
    CHECK(r.tie_groups_x == 1);
}

TEST_CASE("kendall_abs reproduces the unsigned ratio") {
    const CorrelationReport r =
        kendall(series({1, 2, 3, 4}, {1, 3, 2, 4}), CorrMethod::kendall_abs);
    CHECK(r.coefficient == doctest::Approx(4.0 / 6.0).epsilon(1e-14));

    // Reversal keeps the same unsigned value.
    const CorrelationReport rev =
        kendall(series({1, 2, 3, 4}, {4, 2, 3, 1}), CorrMethod::kendall_abs);
    CHECK(rev.coefficient == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("kendall degenerate statuses") {
    const CorrelationReport zero = kendall(series({2, 2, 2}, {1, 2, 3}));
    CHECK(zero.status == CorrStatus::zero_variance);
    CHECK(std::isnan(zero.coefficient));

    const CorrelationReport tied =
        kendall(series({2, 2, 2}, {1, 2, 3}), CorrMethod::kendall_abs);
    CHECK(tied.status == CorrStatus::all_pairs_tied);
}

TEST_CASE("rank statistics are invariant under increasing transforms") {
    const std::vector<double> x = {0.3, 1.8, -2.0, 5.5, 4.2, 0.9};
    const std::vector<double> y = {12.0, 3.0, 8.0, 30.0, 14.0, 2.0};
    auto warp = [](double v) { return std::exp(0.3 * v) + 5.0; };
    std::vector<double> xw(x.size());
    std::transform(x.begin(), x.end(), xw.begin(), warp);

    CHECK(spearman(series(x, y)).coefficient == spearman(series(xw, y)).coefficient);
    CHECK(kendall(series(x, y)).coefficient == kendall(series(xw, y)).coefficient);
}

TEST_CASE("self correlation and antisymmetry") {
    const std::vector<double> x = {4.0, -1.0, 2.5, 9.0, 0.0};
    CHECK(spearman(series(x, x)).coefficient == doctest::Approx(1.0));
    CHECK(kendall(series(x, x)).coefficient == doctest::Approx(1.0));

    const std::vector<double> y = {3.0, 7.0, -2.0, 1.0, 5.0};
    std::vector<double> neg(y.size());
    std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
    CHECK(spearman(series(x, y)).coefficient ==
          doctest::Approx(-spearman(series(x, neg)).coefficient).epsilon(1e-12));
    CHECK(kendall(series(x, y)).coefficient ==
          doctest::Approx(-kendall(series(x, neg)).coefficient).epsilon(1e-12));
}

TEST_CASE("identity-versus-permutation matches brute force up to n = 6") {
    for (int n = 2; n <= 6; ++n) {
        std::vector<int> perm(static_cast<size_t>(n));
        std::iota(perm.begin(), perm.end(), 1);
        do {
            std::vector<double> x(static_cast<size_t>(n)), y(static_cast<size_t>(n));
            std::vector<int> rx(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                x[static_cast<size_t>(i)] = i + 1;
                rx[static_cast<size_t>(i)] = i + 1;
                y[static_cast<size_t>(i)] = perm[static_cast<size_t>(i)];
            }
            const double rs = spearman(series(x, y)).coefficient;
            CHECK(std::abs(rs - oracle::spearman_no_ties(rx, perm)) <= 1e-12);

            const oracle::PairCounts counts = oracle::count_pairs(x, y);
            const CorrelationReport ta = kendall(series(x, y), CorrMethod::kendall_tau_a);
            CHECK(ta.concordant == counts.concordant);
            CHECK(ta.discordant == counts.discordant);
            const double pairs = 0.5 * n * (n - 1);
            CHECK(std::abs(ta.coefficient - (counts.concordant - counts.discordant) / pairs) <=
                  1e-12);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("select_top") {
    auto candidate = [](std::string id, double metric, double oracle) {
        return SelectionCandidate{std::move(id), metric, oracle};
    };

    SUBCASE("single record") {
        const std::vector<SelectionCandidate> one = {candidate("only", 3.0, 61.0)};
        const SelectionReport r = select_top(one);
        CHECK(r.chosen_id == "only");
        CHECK(r.gap == 0.0);
    }

    SUBCASE("aligned orderings have zero gap") {
        const std::vector<SelectionCandidate> two = {candidate("a", 1.0, 50.0),
                                                     candidate("b", 2.0, 60.0)};
        const SelectionReport r = select_top(two);
        CHECK(r.chosen_id == "b");
        CHECK(r.oracle_best_id == "b");
        CHECK(r.gap == 0.0);
    }

    SUBCASE("metric misranking is reported as a gap") {
        const std::vector<SelectionCandidate> three = {candidate("model1", 10.0, 0.70),
                                                       candidate("model2", 20.0, 0.60),
                                                       candidate("model3", 15.0, 0.68)};
        const SelectionReport r = select_top(three);
        CHECK(r.chosen_id == "model2");
        CHECK(r.chosen_metric == 20.0);
        CHECK(r.oracle_best_id == "model1");
        CHECK(r.gap == doctest::Approx(0.10).epsilon(1e-12));
    }

    SUBCASE("metric ties break to the smallest id and are flagged") {
        const std::vector<SelectionCandidate> tied = {candidate("zeta", 5.0, 40.0),
                                                      candidate("alpha", 5.0, 30.0)};
        const SelectionReport r = select_top(tied);
        CHECK(r.chosen_id == "alpha");
        CHECK(r.metric_tie);
    }

    SUBCASE("records missing a field are skipped") {
        std::vector<SelectionCandidate> sparse = {candidate("a", 1.0, 50.0)};
        sparse.push_back(SelectionCandidate{"b", 99.0, std::nullopt});
        const SelectionReport r = select_top(sparse);
        CHECK(r.chosen_id == "a");
    }

    SUBCASE("no eligible records") {
        std::vector<SelectionCandidate> empty = {SelectionCandidate{"a", std::nullopt, 1.0}};
        CHECK_THROWS_WITH_AS(select_top(empty), doctest::Contains("NoEligibleRecords"), Error);
    }

    SUBCASE("argmax is invariant under increasing transforms of the metric") {
        std::vector<SelectionCandidate> base = {candidate("a", 1.0, 10.0),
                                                candidate("b", 7.0, 20.0),
                                                candidate("c", 4.0, 30.0)};
        const std::string chosen = select_top(base).chosen_id;
        for (auto& c : base) c.metric = std::log1p(*c.metric) * 3.0 + 2.0;
        CHECK(select_top(base).chosen_id == chosen);
    }
}
