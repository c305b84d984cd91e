#include "lidar/scatter.hpp"

#include <string>

namespace lidar {

void validate_batch(const EmbeddingBatch& batch) {
    if (batch.n < 2) {
        raise(errc::too_few_classes, "need n >= 2 surrogate classes, got " + std::to_string(batch.n));
    }
    if (batch.q < 2) {
        raise(errc::too_few_samples_per_class,
              "need q >= 2 samples per class, got " + std::to_string(batch.q));
    }
    if (batch.p < 1) {
        raise(errc::invariant_violation, "need p >= 1 dimensions, got " + std::to_string(batch.p));
    }
    const auto rows = static_cast<Eigen::Index>(batch.n) * batch.q;
    if (batch.data.rows() != rows || batch.data.cols() != batch.p) {
        raise(errc::invariant_violation,
              "data shape " + std::to_string(batch.data.rows()) + "x" +
                  std::to_string(batch.data.cols()) + " does not match n*q x p = " +
                  std::to_string(rows) + "x" + std::to_string(batch.p));
    }
    if (!batch.data.allFinite()) {
        raise(errc::non_finite_input, "batch has non-finite entries");
    }
}

namespace {

ClassMeans class_means_unchecked(const EmbeddingBatch& batch) {
    ClassMeans out;
    out.class_means.resize(batch.n, batch.p);
    for (int i = 0; i < batch.n; ++i) {
        out.class_means.row(i) = batch.class_rows(i).colwise().mean();
    }
    // Unweighted mean of class means; classes are equally sized by construction.
    out.grand_mean = out.class_means.colwise().mean().transpose();
    return out;
}

Matrix between_from_means(const ClassMeans& cm, int n) {
    Matrix centered = cm.class_means.rowwise() - cm.grand_mean.transpose();
    Matrix sb = (centered.transpose() * centered) / static_cast<double>(n - 1);
    return 0.5 * (sb + sb.transpose());
}

Matrix within_from_means(const EmbeddingBatch& batch, const ClassMeans& cm, double delta) {
    Matrix centered = batch.data;
    for (int i = 0; i < batch.n; ++i) {
        centered.middleRows(static_cast<Eigen::Index>(i) * batch.q, batch.q).rowwise() -=
            cm.class_means.row(i);
    }
    Matrix sw =
        (centered.transpose() * centered) / (static_cast<double>(batch.n) * (batch.q - 1));
    sw = 0.5 * (sw + sw.transpose());
    sw.diagonal().array() += delta;
    return sw;
}

} // namespace

ClassMeans class_means(const EmbeddingBatch& batch) {
    validate_batch(batch);
    return class_means_unchecked(batch);
}

Matrix between_scatter(const EmbeddingBatch& batch) {
    validate_batch(batch);
    return between_from_means(class_means_unchecked(batch), batch.n);
}

Matrix within_scatter(const EmbeddingBatch& batch, double delta) {
    validate_batch(batch);
    if (!(delta > 0.0)) {
        raise(errc::non_positive_delta, "ridge delta must be > 0, got " + std::to_string(delta));
    }
    return within_from_means(batch, class_means_unchecked(batch), delta);
}

ScatterPair scatter_pair(const EmbeddingBatch& batch, double delta) {
    validate_batch(batch);
    if (!(delta > 0.0)) {
        raise(errc::non_positive_delta, "ridge delta must be > 0, got " + std::to_string(delta));
    }
    ClassMeans cm = class_means_unchecked(batch);
    ScatterPair sp;
    sp.sigma_b = between_from_means(cm, batch.n);
    sp.sigma_w = within_from_means(batch, cm, delta);
    sp.delta = delta;
    sp.class_means = std::move(cm.class_means);
    sp.grand_mean = std::move(cm.grand_mean);
    return sp;
}

Matrix lidar_matrix(const ScatterPair& sp) {
    Matrix w = inv_sqrt_psd(sp.sigma_w);
    Matrix m = w * sp.sigma_b * w;
    return 0.5 * (m + m.transpose());
}

EmbeddingBatch reduce_dim(const EmbeddingBatch& batch, int k) {
    validate_batch(batch);
    if (k < 1 || k > batch.p) {
        raise(errc::bad_target_dim, "target dimension " + std::to_string(k) +
                                        " outside [1, " + std::to_string(batch.p) + "]");
    }

    const Vector pooled_mean = batch.data.colwise().mean().transpose();
    Matrix centered = batch.data.rowwise() - pooled_mean.transpose();
    Matrix gram = centered.transpose() * centered;
    gram = 0.5 * (gram + gram.transpose());
    // Gram matrices pick up slightly larger round-off negatives than the
    // covariance-scale default tolerates.
    EigPair eig = sym_eig(gram, /*neg_tol=*/1e-8);

    EmbeddingBatch out;
    out.n = batch.n;
    out.q = batch.q;
    out.p = k;
    out.branch_label = batch.branch_label;
    out.data = centered * eig.vectors.leftCols(k);
    return out;
}

} // namespace lidar
