#pragma once

#include <cstdint>
#include <vector>

#include "lidar/metrics.hpp"

namespace lidar {

/// Recipe for a planted-signal batch: class means live on the first k_signal
/// coordinates, every sample gets isotropic within-class noise, and the last
/// r_nuisance coordinates receive class-independent per-sample noise that
/// inflates the pooled covariance without adding discriminative content.
struct PlantedSpec {
    int n = 0;
    int q = 0;
    int p = 0;
    int k_signal = 0;
    double signal_strength = 0.0;
    double within_noise = 1.0;
    int r_nuisance = 0;
    double nuisance_scale = 0.0;
    std::uint64_t seed = 0;
};

/// Deterministic in the spec: equal specs yield bit-identical batches.
EmbeddingBatch gen_planted(const PlantedSpec& spec);

/// Appends r coordinates of zero-mean isotropic noise (scale noise_scale),
/// drawn fresh per sample, independent of class. r = 0 returns the batch
/// unchanged.
EmbeddingBatch append_noise(const EmbeddingBatch& batch, int r, double noise_scale,
                            std::uint64_t seed);

struct Prop1Inputs {
    Spectrum lambda; // discriminant spectrum of the un-appended batch
    int p = 0;       // ambient dimension the spectrum was computed in
    int r = 0;       // appended noise dimensions
    double delta = 0.0;
    double eps = 0.0;
};

/// Names of the bound's preconditions this input violates (empty when all
/// hold): max_ratio, eps_bound, delta_bound, spectrum_mass.
std::vector<std::string> prop1_unmet_preconditions(const Prop1Inputs& in);

/// Closed-form upper bound on the score after appending r noise dimensions:
/// score(lambda, eps) * exp[-2p log(l1/(l1 + r*delta)) - (r*delta/l1) log(delta/l1)]
/// with l1 = ||lambda||_1. The factor is exactly 1 at r = 0 and >= 1 whenever
/// delta < l1. Raises PreconditionViolated naming the unmet conditions.
double prop1_bound(const Prop1Inputs& in);

struct Prop1Report {
    int trials = 0;
    int checked = 0;
    int skipped = 0; // precondition-violating trials, counted separately
    int violations = 0;
    std::vector<std::string> unmet_preconditions;
    double base_score = 0.0; // score of the un-appended batch
    double bound = 0.0;
    std::vector<double> margins; // bound - appended score, one per checked trial
    double min_margin = 0.0;
    double max_margin = 0.0;
    double mean_margin = 0.0;
};

/// Empirical harness: per trial, append fresh noise to the batch, score it,
/// and test the score against prop1_bound with a 1e-6 slack. Any configured
/// dimensionality reduction is ignored so the appended coordinates stay
/// visible to the check. Per-trial seeds derive from (seed, trial index).
Prop1Report prop1_check(const EmbeddingBatch& batch, int r, double noise_scale,
                        const MetricConfig& cfg, int trials, std::uint64_t seed);

/// SplitMix64-style deterministic seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

} // namespace lidar
