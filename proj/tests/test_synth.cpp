#include "doctest.h"

#include <cmath>

#include "lidar/synth.hpp"

#include "oracles.hpp"

using namespace lidar;

namespace {

PlantedSpec base_spec() {
    PlantedSpec spec;
    spec.n = 64;
    spec.q = 8;
    spec.p = 16;
    spec.k_signal = 4;
    spec.signal_strength = 10.0;
    spec.within_noise = 0.5;
    spec.seed = 9001;
    return spec;
}

MetricConfig config(double delta, double eps = 0.0) {
    MetricConfig cfg;
    cfg.delta = delta;
    cfg.eps = eps;
    return cfg;
}

Spectrum spectrum_of(std::vector<double> values) {
    Spectrum s;
    s.source_dim = static_cast<int>(values.size());
    s.values = std::move(values);
    return s;
}

} // namespace

TEST_CASE("gen_planted is deterministic in the spec") {
    const EmbeddingBatch a = gen_planted(base_spec());
    const EmbeddingBatch b = gen_planted(base_spec());
    CHECK(a.data == b.data);

    PlantedSpec other = base_spec();
    other.seed += 1;
    CHECK(gen_planted(other).data != a.data);
}

TEST_CASE("gen_planted rejects malformed specs") {
    PlantedSpec spec = base_spec();
    spec.k_signal = 10;
    spec.r_nuisance = 10; // 20 > p = 16
    CHECK_THROWS_WITH_AS(gen_planted(spec), doctest::Contains("BadSpec"), Error);

    spec = base_spec();
    spec.within_noise = 0.0;
    CHECK_THROWS_WITH_AS(gen_planted(spec), doctest::Contains("BadSpec"), Error);

    spec = base_spec();
    spec.n = 1;
    CHECK_THROWS_WITH_AS(gen_planted(spec), doctest::Contains("BadSpec"), Error);
}

TEST_CASE("nothing discriminative with two classes scores one") {
    PlantedSpec spec;
    spec.n = 2;
    spec.q = 8;
    spec.p = 16;
    spec.k_signal = 0;
    spec.signal_strength = 0.0;
    spec.within_noise = 1.0;
    spec.seed = 4;
    // The between scatter has rank n-1 = 1, so the smooth rank collapses to 1.
    const double value = lidar_score(gen_planted(spec), config(1e-4)).value;
    CHECK(value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gen_planted recovers the planted rank") {
    PlantedSpec spec;
    spec.n = 1000;
    spec.q = 8;
    spec.p = 32;
    spec.k_signal = 4;
    spec.signal_strength = 10.0;
    spec.within_noise = 0.5;
    spec.seed = 77;
    const double value = lidar_score(gen_planted(spec), config(1e-4)).value;
    CHECK(std::abs(value - 4.0) <= 0.1);
}

TEST_CASE("a dominant nuisance block fools rankme_aug but not lidar") {
    PlantedSpec clean;
    clean.n = 256;
    clean.q = 8;
    clean.p = 64;
    clean.k_signal = 4;
    clean.signal_strength = 10.0;
    clean.within_noise = 0.5;
    clean.seed = 31;

    PlantedSpec noisy = clean;
    noisy.r_nuisance = 32;
    noisy.nuisance_scale = 50.0;

    const EmbeddingBatch clean_batch = gen_planted(clean);
    const EmbeddingBatch noisy_batch = gen_planted(noisy);

    const double rankme_clean = rankme_aug_score(clean_batch, 0.0).value;
    const double rankme_noisy = rankme_aug_score(noisy_batch, 0.0).value;
    CHECK(rankme_noisy - rankme_clean >= 10.0);

    const double lidar_clean = lidar_score(clean_batch, config(1e-4)).value;
    const double lidar_noisy = lidar_score(noisy_batch, config(1e-4)).value;
    CHECK(std::abs(lidar_noisy - lidar_clean) <= 0.5);
}

TEST_CASE("append_noise basics") {
    const EmbeddingBatch b = oracle::random_batch(500, 50, 6, 1.0, 0.7, 61);

    SUBCASE("r = 0 returns the batch unchanged") {
        const EmbeddingBatch same = append_noise(b, 0, 2.0, 123);
        CHECK(same.p == b.p);
        CHECK(same.data == b.data);
    }

    SUBCASE("appended class means shrink with q") {
        const int r = 8;
        const double scale = 0.4;
        const EmbeddingBatch wide = append_noise(b, r, scale, 99);
        REQUIRE(wide.p == b.p + r);
        const Matrix sb = between_scatter(wide);
        double mean_diag = 0.0;
        for (int d = b.p; d < wide.p; ++d) mean_diag += sb(d, d);
        mean_diag /= r;
        const double expected = scale * scale / b.q;
        CHECK(mean_diag >= 0.4 * expected);
        CHECK(mean_diag <= 2.5 * expected);
    }

    SUBCASE("negative r is rejected") {
        CHECK_THROWS_WITH_AS(append_noise(b, -1, 1.0, 0), doctest::Contains("BadSpec"), Error);
    }
}

TEST_CASE("prop1_bound closed form") {
    SUBCASE("r = 0 leaves the score unchanged") {
        Prop1Inputs in{spectrum_of({2.0, 1.5, 1.0, 0.5}), 4, 0, 0.01, 0.0};
        const double base = smooth_rank(in.lambda, 0.0).value;
        CHECK(prop1_bound(in) == base);
    }

    SUBCASE("vanishing delta recovers the score") {
        Prop1Inputs in{spectrum_of({1.0, 1.0, 1.0, 1.0}), 4, 2, 1e-12, 0.0};
        CHECK(prop1_bound(in) == doctest::Approx(4.0).epsilon(1e-9));
    }

    SUBCASE("frozen spot value") {
        // Independently scripted high-precision evaluation of the closed form
        // at lambda = [1,1,1,1], r = 2, delta = 0.01, eps = 0.
        Prop1Inputs in{spectrum_of({1.0, 1.0, 1.0, 1.0}), 4, 2, 0.01, 0.0};
        CHECK(prop1_bound(in) == doctest::Approx(4.2894221030135242).epsilon(1e-12));
    }

    SUBCASE("factor is never below one while delta < mass") {
        std::mt19937_64 rng(321);
        std::uniform_real_distribution<double> mag(0.2, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> lambda;
            const int p = 4 + static_cast<int>(rng() % 12);
            for (int i = 0; i < p; ++i) lambda.push_back(mag(rng));
            std::sort(lambda.begin(), lambda.end(), std::greater<>());
            Prop1Inputs in{spectrum_of(lambda), p, static_cast<int>(rng() % 6), 1e-3, 0.0};
            if (!prop1_unmet_preconditions(in).empty()) continue;
            const double base = smooth_rank(in.lambda, in.eps).value;
            CHECK(prop1_bound(in) >= base * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("prop1 preconditions are reported by name") {
    // Single dominant eigenvalue: max/l1 = 1/1.02 > 1 - exp(-1).
    Prop1Inputs dominant{spectrum_of({1.0, 0.01, 0.01}), 3, 2, 1e-3, 0.0};
    const auto unmet = prop1_unmet_preconditions(dominant);
    REQUIRE(unmet.size() >= 1);
    CHECK(unmet.front() == "max_ratio");
    CHECK_THROWS_WITH_AS(prop1_bound(dominant), doctest::Contains("PreconditionViolated"), Error);

    Prop1Inputs zero{spectrum_of({0.0, 0.0}), 2, 1, 1e-3, 0.0};
    CHECK(prop1_unmet_preconditions(zero) == std::vector<std::string>{"spectrum_mass"});

    Prop1Inputs big_eps{spectrum_of({1.0, 1.0, 1.0, 1.0}), 4, 1, 1e-3, 0.9};
    const auto unmet_eps = prop1_unmet_preconditions(big_eps);
    CHECK(std::find(unmet_eps.begin(), unmet_eps.end(), "eps_bound") != unmet_eps.end());

    Prop1Inputs big_delta{spectrum_of({1.0, 1.0, 1.0, 1.0}), 4, 1, 10.0, 0.0};
    const auto unmet_delta = prop1_unmet_preconditions(big_delta);
    CHECK(std::find(unmet_delta.begin(), unmet_delta.end(), "delta_bound") != unmet_delta.end());
}

TEST_CASE("prop1_check counts precondition skips") {
    // Two classes give a rank-1 spectrum, which violates max_ratio.
    PlantedSpec spec;
    spec.n = 2;
    spec.q = 8;
    spec.p = 8;
    spec.k_signal = 2;
    spec.signal_strength = 5.0;
    spec.within_noise = 0.5;
    spec.seed = 10;
    const Prop1Report report = prop1_check(gen_planted(spec), 4, 0.1, config(1e-3), 3, 0);
    CHECK(report.trials == 3);
    CHECK(report.checked == 0);
    CHECK(report.skipped == 3);
    CHECK(report.violations == 0);
    CHECK(!report.unmet_preconditions.empty());
}

TEST_CASE("prop1_check holds with zero appended noise") {
    PlantedSpec spec;
    spec.n = 200;
    spec.q = 50;
    spec.p = 8;
    spec.k_signal = 4;
    spec.signal_strength = 1.0;
    spec.within_noise = 1.0;
    spec.seed = 5;
    const Prop1Report report = prop1_check(gen_planted(spec), 6, 0.0, config(1e-3), 5, 42);
    CHECK(report.skipped == 0);
    CHECK(report.violations == 0);
    CHECK(report.min_margin > 0.0);
}

TEST_CASE("prop1_check is deterministic in the seed") {
    PlantedSpec spec;
    spec.n = 100;
    spec.q = 50;
    spec.p = 8;
    spec.k_signal = 4;
    spec.signal_strength = 1.0;
    spec.within_noise = 1.0;
    spec.seed = 6;
    const EmbeddingBatch b = gen_planted(spec);
    const Prop1Report r1 = prop1_check(b, 4, 0.005, config(1e-3), 4, 7);
    const Prop1Report r2 = prop1_check(b, 4, 0.005, config(1e-3), 4, 7);
    CHECK(r1.margins == r2.margins);
    CHECK(r1.violations == 0);
    CHECK(r2.bound == r1.bound);
}
