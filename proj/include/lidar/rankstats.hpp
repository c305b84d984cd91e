#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidar/error.hpp"

namespace lidar {

/// Metric scores paired with oracle values, plus their model ids.
struct PairedSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<std::string> labels;
};

enum class CorrMethod { spearman, kendall_tau_a, kendall_tau_b, kendall_abs };

const char* corr_method_name(CorrMethod method) noexcept;
std::optional<CorrMethod> corr_method_from(std::string_view name) noexcept;

enum class CorrStatus { ok, zero_variance, all_pairs_tied };

const char* corr_status_name(CorrStatus status) noexcept;

struct CorrelationReport {
    CorrMethod method = CorrMethod::spearman;
    CorrStatus status = CorrStatus::ok;
    double coefficient = std::numeric_limits<double>::quiet_NaN(); // NaN when undefined
    int n = 0;
    int tie_groups_x = 0; // value groups of size >= 2
    int tie_groups_y = 0;
    long long concordant = 0; // kendall only
    long long discordant = 0;
};

/// Midrank convention: ranks 1..n, ties receive the average of the ranks
/// they span.
std::vector<double> rank_values(std::span<const double> v);

/// Pearson correlation of the two rank vectors. A constant rank vector yields
/// zero_variance status instead of a coefficient.
CorrelationReport spearman(const PairedSeries& s);

/// Concordant/discordant pair statistics. tau_a divides by n(n-1)/2, tau_b is
/// tie-corrected, kendall_abs is |C-D|/(C+D) (sign discarded).
CorrelationReport kendall(const PairedSeries& s, CorrMethod variant = CorrMethod::kendall_tau_b);

/// One model as seen by the selection protocol.
struct SelectionCandidate {
    std::string model_id;
    std::optional<double> metric;
    std::optional<double> oracle;
};

struct SelectionReport {
    std::string chosen_id; // argmax metric; ties broken by smallest id
    double chosen_metric = 0.0;
    double chosen_oracle = 0.0;
    std::string oracle_best_id;
    double oracle_best_accuracy = 0.0;
    double gap = 0.0; // oracle best minus chosen's oracle, >= 0
    bool metric_tie = false;
};

/// Top-ranking-model report over candidates that carry both a metric value
/// and an oracle value. Raises NoEligibleRecords when none qualify.
SelectionReport select_top(std::span<const SelectionCandidate> candidates);

} // namespace lidar
