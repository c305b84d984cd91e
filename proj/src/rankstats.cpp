#include "lidar/rankstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidar/spectra.hpp"

namespace lidar {

const char* corr_method_name(CorrMethod method) noexcept {
    switch (method) {
        case CorrMethod::spearman: return "spearman";
        case CorrMethod::kendall_tau_a: return "tau-a";
        case CorrMethod::kendall_tau_b: return "tau-b";
        case CorrMethod::kendall_abs: return "tau-abs";
    }
    return "unknown";
}

std::optional<CorrMethod> corr_method_from(std::string_view name) noexcept {
    if (name == "spearman") return CorrMethod::spearman;
    if (name == "tau-a" || name == "tau_a") return CorrMethod::kendall_tau_a;
    if (name == "tau-b" || name == "tau_b") return CorrMethod::kendall_tau_b;
    if (name == "tau-abs" || name == "tau_abs") return CorrMethod::kendall_abs;
    return std::nullopt;
}

const char* corr_status_name(CorrStatus status) noexcept {
    switch (status) {
        case CorrStatus::ok: return "ok";
        case CorrStatus::zero_variance: return "zero_variance";
        case CorrStatus::all_pairs_tied: return "all_pairs_tied";
    }
    return "unknown";
}

namespace {

void validate_values(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) raise(errc::non_finite_input, "series has non-finite values");
    }
}

void validate_series(const PairedSeries& s) {
    if (s.x.size() != s.y.size() ||
        (!s.labels.empty() && s.labels.size() != s.x.size())) {
        raise(errc::invariant_violation, "paired series lengths disagree");
    }
    if (s.x.size() < 2) raise(errc::invariant_violation, "paired series needs n >= 2");
    validate_values(s.x);
    validate_values(s.y);
}

int tie_group_count(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    int groups = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        if (j > i) ++groups;
        i = j + 1;
    }
    return groups;
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

} // namespace

std::vector<double> rank_values(std::span<const double> v) {
    if (v.empty()) raise(errc::invariant_violation, "cannot rank an empty series");
    validate_values(v);

    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(v.size());
    size_t i = 0;
    while (i < idx.size()) {
        size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t t = i; t <= j; ++t) ranks[idx[t]] = midrank;
        i = j + 1;
    }
    return ranks;
}

CorrelationReport spearman(const PairedSeries& s) {
    validate_series(s);
    const std::vector<double> rx = rank_values(s.x);
    const std::vector<double> ry = rank_values(s.y);
    const size_t n = rx.size();

    const double mean = 0.5 * static_cast<double>(n + 1); // ranks always average to (n+1)/2
    CompensatedSum sxx, syy, sxy;
    for (size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }

    CorrelationReport report;
    report.method = CorrMethod::spearman;
    report.n = static_cast<int>(n);
    report.tie_groups_x = tie_group_count(s.x);
    report.tie_groups_y = tie_group_count(s.y);
    if (sxx.value() <= 0.0 || syy.value() <= 0.0) {
        report.status = CorrStatus::zero_variance;
        return report;
    }
    report.coefficient = clamp_unit(sxy.value() / std::sqrt(sxx.value() * syy.value()));
    return report;
}

CorrelationReport kendall(const PairedSeries& s, CorrMethod variant) {
    if (variant != CorrMethod::kendall_tau_a && variant != CorrMethod::kendall_tau_b &&
        variant != CorrMethod::kendall_abs) {
        raise(errc::invariant_violation, "kendall requires a tau variant");
    }
    validate_series(s);
    const size_t n = s.x.size();

    long long concordant = 0, discordant = 0;
    long long ties_x_only = 0, ties_y_only = 0, ties_both = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = s.x[j] - s.x[i];
            const double dy = s.y[j] - s.y[i];
            if (dx == 0.0 && dy == 0.0) {
                ++ties_both;
            } else if (dx == 0.0) {
                ++ties_x_only;
            } else if (dy == 0.0) {
                ++ties_y_only;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }

    CorrelationReport report;
    report.method = variant;
    report.n = static_cast<int>(n);
    report.tie_groups_x = tie_group_count(s.x);
    report.tie_groups_y = tie_group_count(s.y);
    report.concordant = concordant;
    report.discordant = discordant;

    const long long cd = concordant + discordant;
    const long long nondegenerate_x = cd + ties_y_only; // pairs with distinct x
    const long long nondegenerate_y = cd + ties_x_only; // pairs with distinct y

    const double diff = static_cast<double>(concordant - discordant);
    switch (variant) {
        case CorrMethod::kendall_tau_a: {
            if (nondegenerate_x == 0 || nondegenerate_y == 0) {
                report.status = CorrStatus::zero_variance;
                return report;
            }
            const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
            report.coefficient = clamp_unit(diff / pairs);
            break;
        }
        case CorrMethod::kendall_tau_b: {
            if (nondegenerate_x == 0 || nondegenerate_y == 0) {
                report.status = CorrStatus::zero_variance;
                return report;
            }
            const double denom = std::sqrt(static_cast<double>(nondegenerate_x) *
                                           static_cast<double>(nondegenerate_y));
            report.coefficient = clamp_unit(diff / denom);
            break;
        }
        case CorrMethod::kendall_abs: {
            if (cd == 0) {
                // C + D = 0 forces a constant series; the variant's own error
                // names the division that fails.
                report.status = CorrStatus::all_pairs_tied;
                return report;
            }
            report.coefficient = clamp_unit(std::abs(diff) / static_cast<double>(cd));
            break;
        }
        default: break;
    }
    return report;
}

SelectionReport select_top(std::span<const SelectionCandidate> candidates) {
    const SelectionCandidate* chosen = nullptr;
    const SelectionCandidate* best = nullptr;
    bool metric_tie = false;

    for (const auto& c : candidates) {
        if (!c.metric || !c.oracle || !std::isfinite(*c.metric) || !std::isfinite(*c.oracle)) {
            continue;
        }
        if (!chosen || *c.metric > *chosen->metric) {
            chosen = &c;
            metric_tie = false;
        } else if (*c.metric == *chosen->metric) {
            metric_tie = true;
            if (c.model_id < chosen->model_id) chosen = &c;
        }
        if (!best || *c.oracle > *best->oracle ||
            (*c.oracle == *best->oracle && c.model_id < best->model_id)) {
            best = &c;
        }
    }
    if (!chosen) {
        raise(errc::no_eligible_records,
              "no record carries both the metric and the oracle field");
    }

    SelectionReport report;
    report.chosen_id = chosen->model_id;
    report.chosen_metric = *chosen->metric;
    report.chosen_oracle = *chosen->oracle;
    report.oracle_best_id = best->model_id;
    report.oracle_best_accuracy = *best->oracle;
    report.gap = report.oracle_best_accuracy - report.chosen_oracle;
    report.metric_tie = metric_tie;
    return report;
}

} // namespace lidar
