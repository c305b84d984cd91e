#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lidar/scatter.hpp"

namespace lidar {

enum class MetricKind { lidar, rankme, rankme_aug };

const char* metric_kind_name(MetricKind kind) noexcept;
std::optional<MetricKind> metric_kind_from(std::string_view name) noexcept;

enum class DegeneratePolicy { return_one_and_flag, error };

struct MetricConfig {
    double delta = kDefaultDelta;
    double eps = kDefaultEps;
    std::optional<int> reduce_before_invert; // project to k dims before the inversion
    DegeneratePolicy degenerate_policy = DegeneratePolicy::return_one_and_flag;
    bool center_rankme = false; // vanilla RankMe takes the matrix as given
};

struct MetricScore {
    double value = 1.0;
    MetricKind kind = MetricKind::lidar;
    bool degenerate = false;
    std::string branch_label;
    MetricConfig config_used;
    Spectrum spectrum; // retained for diagnostics
};

/// Smooth rank of the whitened discriminant matrix of the batch.
MetricScore lidar_score(const EmbeddingBatch& batch, const MetricConfig& cfg);

/// Smooth rank over the singular values of z, taken as given.
MetricScore rankme_score(const Matrix& z, double eps,
                         DegeneratePolicy policy = DegeneratePolicy::return_one_and_flag);

/// RankMe on the batch flattened to (n*q) x p and centered by the grand mean,
/// matching covariance-spectrum semantics.
MetricScore rankme_aug_score(const EmbeddingBatch& batch, double eps,
                             DegeneratePolicy policy = DegeneratePolicy::return_one_and_flag);

/// Batch rows as an (n*q) x p matrix, optionally grand-mean centered.
Matrix flatten(const EmbeddingBatch& batch, bool center);

struct SweepEntry {
    std::string model_id;
    MetricScore score;
};

/// One score per (model, kind), ordered by model id then kind. Models are
/// evaluated concurrently up to the LIDAR_THREADS budget; results merge
/// deterministically.
std::vector<SweepEntry> score_sweep(
    const std::vector<std::pair<std::string, EmbeddingBatch>>& models,
    const MetricConfig& cfg, const std::set<MetricKind>& kinds);

/// Concurrency cap from LIDAR_THREADS (unset or 0 = hardware concurrency).
int thread_budget() noexcept;

} // namespace lidar
