#include "lidar/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace lidar {

const char* metric_kind_name(MetricKind kind) noexcept {
    switch (kind) {
        case MetricKind::lidar: return "lidar";
        case MetricKind::rankme: return "rankme";
        case MetricKind::rankme_aug: return "rankme_aug";
    }
    return "unknown";
}

std::optional<MetricKind> metric_kind_from(std::string_view name) noexcept {
    if (name == "lidar") return MetricKind::lidar;
    if (name == "rankme") return MetricKind::rankme;
    if (name == "rankme_aug" || name == "rankme-aug") return MetricKind::rankme_aug;
    return std::nullopt;
}

namespace {

void validate_config(const MetricConfig& cfg) {
    if (!(cfg.delta > 0.0)) raise(errc::non_positive_delta, "delta must be > 0");
    if (cfg.eps < 0.0) raise(errc::invariant_violation, "eps must be >= 0");
}

MetricScore finish(Spectrum spectrum, double eps, MetricKind kind, std::string branch,
                   const MetricConfig& cfg, DegeneratePolicy policy) {
    SmoothRank sr = smooth_rank(spectrum, eps);
    if (sr.degenerate && policy == DegeneratePolicy::error) {
        raise(errc::degenerate_spectrum, "spectrum has zero mass (complete collapse)");
    }
    MetricScore score;
    score.value = sr.value;
    score.kind = kind;
    score.degenerate = sr.degenerate;
    score.branch_label = std::move(branch);
    score.config_used = cfg;
    score.spectrum = std::move(spectrum);
    return score;
}

} // namespace

MetricScore lidar_score(const EmbeddingBatch& batch, const MetricConfig& cfg) {
    validate_config(cfg);
    validate_batch(batch);
    if (cfg.reduce_before_invert && (*cfg.reduce_before_invert < 1 || *cfg.reduce_before_invert > batch.p)) {
        raise(errc::bad_target_dim, "reduce_before_invert outside [1, p]");
    }

    const EmbeddingBatch* source = &batch;
    EmbeddingBatch reduced;
    if (cfg.reduce_before_invert) {
        reduced = reduce_dim(batch, *cfg.reduce_before_invert);
        source = &reduced;
    }

    ScatterPair sp = scatter_pair(*source, cfg.delta);
    Matrix lm = lidar_matrix(sp);
    // The whitening amplifies round-off by up to 1/delta; widen the clamp
    // window accordingly.
    EigPair eig = sym_eig(lm, /*neg_tol=*/1e-8);
    return finish(std::move(eig.spectrum), cfg.eps, MetricKind::lidar, batch.branch_label, cfg,
                  cfg.degenerate_policy);
}

MetricScore rankme_score(const Matrix& z, double eps, DegeneratePolicy policy) {
    if (eps < 0.0) raise(errc::invariant_violation, "eps must be >= 0");
    MetricConfig cfg;
    cfg.eps = eps;
    return finish(singular_values(z), eps, MetricKind::rankme, "", cfg, policy);
}

MetricScore rankme_aug_score(const EmbeddingBatch& batch, double eps, DegeneratePolicy policy) {
    if (eps < 0.0) raise(errc::invariant_violation, "eps must be >= 0");
    MetricConfig cfg;
    cfg.eps = eps;
    MetricScore score =
        finish(singular_values(flatten(batch, /*center=*/true)), eps, MetricKind::rankme_aug,
               batch.branch_label, cfg, policy);
    return score;
}

Matrix flatten(const EmbeddingBatch& batch, bool center) {
    validate_batch(batch);
    if (!center) return batch.data;
    ClassMeans cm = class_means(batch);
    return batch.data.rowwise() - cm.grand_mean.transpose();
}

int thread_budget() noexcept {
    int budget = 0;
    if (const char* env = std::getenv("LIDAR_THREADS")) {
        budget = std::atoi(env);
    }
    if (budget <= 0) {
        budget = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::max(budget, 1);
}

std::vector<SweepEntry> score_sweep(
    const std::vector<std::pair<std::string, EmbeddingBatch>>& models, const MetricConfig& cfg,
    const std::set<MetricKind>& kinds) {
    if (models.empty()) raise(errc::invariant_violation, "score_sweep needs at least one model");
    if (kinds.empty()) raise(errc::invariant_violation, "score_sweep needs at least one metric kind");
    const int p = models.front().second.p;
    for (const auto& [id, batch] : models) {
        if (batch.p != p) {
            raise(errc::dimension_mismatch, "model '" + id + "' has p = " + std::to_string(batch.p) +
                                                ", expected " + std::to_string(p));
        }
    }

    // Job list ordered by model id then kind; results land by index, so the
    // merge is deterministic no matter how threads interleave.
    std::vector<size_t> order(models.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return models[a].first < models[b].first;
    });

    struct Job {
        size_t model_index;
        MetricKind kind;
    };
    std::vector<Job> jobs;
    jobs.reserve(order.size() * kinds.size());
    for (size_t idx : order) {
        for (MetricKind kind : kinds) jobs.push_back({idx, kind});
    }

    std::vector<SweepEntry> results(jobs.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const size_t j = next.fetch_add(1);
            if (j >= jobs.size() || failed.load()) return;
            try {
                const auto& [id, batch] = models[jobs[j].model_index];
                MetricScore score;
                switch (jobs[j].kind) {
                    case MetricKind::lidar: score = lidar_score(batch, cfg); break;
                    case MetricKind::rankme:
                        score = rankme_score(flatten(batch, cfg.center_rankme), cfg.eps,
                                             cfg.degenerate_policy);
                        score.branch_label = batch.branch_label;
                        break;
                    case MetricKind::rankme_aug:
                        score = rankme_aug_score(batch, cfg.eps, cfg.degenerate_policy);
                        break;
                }
                results[j] = SweepEntry{id, std::move(score)};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    const int threads = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace lidar
