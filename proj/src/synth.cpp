#include "lidar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lidar {

namespace {

constexpr double kInvE = 0.36787944117144233; // exp(-1)

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void validate_spec(const PlantedSpec& s) {
    const bool scales_ok = std::isfinite(s.signal_strength) && s.signal_strength >= 0.0 &&
                           std::isfinite(s.within_noise) && s.within_noise > 0.0 &&
                           std::isfinite(s.nuisance_scale) && s.nuisance_scale >= 0.0;
    if (s.n < 2 || s.q < 2 || s.p < 1 || s.k_signal < 0 || s.r_nuisance < 0 ||
        s.k_signal + s.r_nuisance > s.p || !scales_ok) {
        raise(errc::bad_spec, "invalid planted spec (need n>=2, q>=2, p>=1, "
                              "k_signal + r_nuisance <= p, within_noise > 0, scales >= 0)");
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(seed ^ splitmix64(index));
}

EmbeddingBatch gen_planted(const PlantedSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    Matrix means = Matrix::Zero(spec.n, spec.p);
    for (int i = 0; i < spec.n; ++i) {
        for (int d = 0; d < spec.k_signal; ++d) {
            means(i, d) = spec.signal_strength * unit(rng);
        }
    }

    EmbeddingBatch batch;
    batch.n = spec.n;
    batch.q = spec.q;
    batch.p = spec.p;
    batch.data.resize(static_cast<Eigen::Index>(spec.n) * spec.q, spec.p);
    const int nuisance_start = spec.p - spec.r_nuisance;
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.q; ++j) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * spec.q + j;
            for (int d = 0; d < spec.p; ++d) {
                batch.data(row, d) = means(i, d) + spec.within_noise * unit(rng);
            }
            for (int d = nuisance_start; d < spec.p; ++d) {
                batch.data(row, d) += spec.nuisance_scale * unit(rng);
            }
        }
    }
    return batch;
}

EmbeddingBatch append_noise(const EmbeddingBatch& batch, int r, double noise_scale,
                            std::uint64_t seed) {
    validate_batch(batch);
    if (r < 0) raise(errc::bad_spec, "appended dimension count must be >= 0");
    if (!(std::isfinite(noise_scale) && noise_scale >= 0.0)) {
        raise(errc::bad_spec, "noise scale must be finite and >= 0");
    }
    if (r == 0) return batch;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    EmbeddingBatch out;
    out.n = batch.n;
    out.q = batch.q;
    out.p = batch.p + r;
    out.branch_label = batch.branch_label;
    out.data.resize(batch.data.rows(), batch.p + r);
    out.data.leftCols(batch.p) = batch.data;
    for (Eigen::Index row = 0; row < out.data.rows(); ++row) {
        for (int d = 0; d < r; ++d) {
            out.data(row, batch.p + d) = noise_scale * unit(rng);
        }
    }
    return out;
}

std::vector<std::string> prop1_unmet_preconditions(const Prop1Inputs& in) {
    std::vector<std::string> unmet;
    if (in.r < 0 || in.p < 1 || !(in.delta > 0.0) || in.eps < 0.0) {
        raise(errc::bad_spec, "prop1 inputs need p >= 1, r >= 0, delta > 0, eps >= 0");
    }
    const double l1 = compensated_sum(in.lambda.values);
    if (!(l1 > 0.0)) {
        unmet.push_back("spectrum_mass");
        return unmet; // the ratio conditions are meaningless without mass
    }
    const double max_value =
        in.lambda.values.empty() ? 0.0 : *std::max_element(in.lambda.values.begin(),
                                                           in.lambda.values.end());
    const double ratio = max_value / l1;
    if (!(ratio < 1.0 - kInvE)) unmet.push_back("max_ratio");
    if (!(in.eps < 1.0 - ratio)) unmet.push_back("eps_bound");
    if (!(in.delta < (kInvE - in.eps) * l1)) unmet.push_back("delta_bound");
    return unmet;
}

double prop1_bound(const Prop1Inputs& in) {
    auto unmet = prop1_unmet_preconditions(in);
    if (!unmet.empty()) {
        std::string joined;
        for (const auto& name : unmet) {
            if (!joined.empty()) joined += ", ";
            joined += name;
        }
        raise(errc::precondition_violated, joined);
    }

    const double l1 = compensated_sum(in.lambda.values);
    const double base = smooth_rank(in.lambda, in.eps).value;
    const double rd = static_cast<double>(in.r) * in.delta;
    const double term_mass = -2.0 * static_cast<double>(in.p) * std::log(l1 / (l1 + rd));
    const double term_tail = -(rd / l1) * std::log(in.delta / l1);
    return base * std::exp(term_mass + term_tail);
}

Prop1Report prop1_check(const EmbeddingBatch& batch, int r, double noise_scale,
                        const MetricConfig& cfg, int trials, std::uint64_t seed) {
    if (trials < 1) raise(errc::bad_spec, "trials must be >= 1");

    MetricConfig check_cfg = cfg;
    check_cfg.reduce_before_invert.reset(); // appended coordinates must stay visible

    Prop1Report report;
    report.trials = trials;

    const MetricScore base = lidar_score(batch, check_cfg);
    report.base_score = base.value;

    Prop1Inputs inputs;
    inputs.lambda = base.spectrum;
    inputs.p = base.spectrum.source_dim;
    inputs.r = r;
    inputs.delta = check_cfg.delta;
    inputs.eps = check_cfg.eps;

    report.unmet_preconditions = prop1_unmet_preconditions(inputs);
    if (!report.unmet_preconditions.empty()) {
        report.skipped = trials;
        return report;
    }

    report.bound = prop1_bound(inputs);
    report.margins.reserve(trials);
    CompensatedSum margin_sum;
    for (int t = 0; t < trials; ++t) {
        const EmbeddingBatch appended = append_noise(batch, r, noise_scale, derive_seed(seed, t));
        const double value = lidar_score(appended, check_cfg).value;
        const double margin = report.bound - value;
        report.margins.push_back(margin);
        margin_sum.add(margin);
        if (value > report.bound + 1e-6) ++report.violations;
    }
    report.checked = trials;
    report.min_margin = *std::min_element(report.margins.begin(), report.margins.end());
    report.max_margin = *std::max_element(report.margins.begin(), report.margins.end());
    report.mean_margin = margin_sum.value() / static_cast<double>(trials);
    return report;
}

} // namespace lidar
