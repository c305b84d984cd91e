#pragma once

#include <string>

#include "lidar/spectra.hpp"

namespace lidar {

/// A balanced block of embeddings: n surrogate classes, q samples per class,
/// p dimensions. Rows of `data` are class-major: class i, sample j lives at
/// row i*q + j.
struct EmbeddingBatch {
    int n = 0;
    int q = 0;
    int p = 0;
    Matrix data; // (n*q) x p
    std::string branch_label;

    auto class_rows(int i) const { return data.middleRows(static_cast<Eigen::Index>(i) * q, q); }
};

/// Throws TooFewClasses (n < 2), TooFewSamplesPerClass (q < 2) or
/// InvariantViolation / NonFiniteInput for shape and finiteness breaches.
void validate_batch(const EmbeddingBatch& batch);

struct ClassMeans {
    Matrix class_means; // n x p
    Vector grand_mean;  // p; unweighted mean of class means
};

ClassMeans class_means(const EmbeddingBatch& batch);

/// Unbiased between-class scatter: (1/(n-1)) sum_i (m_i - g)(m_i - g)^T.
Matrix between_scatter(const EmbeddingBatch& batch);

/// Unbiased within-class scatter plus ridge:
/// (1/(n(q-1))) sum_ij (x_ij - m_i)(x_ij - m_i)^T + delta*I.
Matrix within_scatter(const EmbeddingBatch& batch, double delta);

struct ScatterPair {
    Matrix sigma_w; // p x p, SPD (includes the ridge)
    Matrix sigma_b; // p x p, PSD, rank <= n-1
    double delta = 0.0;
    Matrix class_means; // n x p
    Vector grand_mean;  // p
};

/// Both scatter estimates from one pass over the batch.
ScatterPair scatter_pair(const EmbeddingBatch& batch, double delta);

/// Whitened discriminant matrix W * sigma_b * W with W = inv_sqrt_psd(sigma_w).
Matrix lidar_matrix(const ScatterPair& sp);

/// Projects every sample onto the top-k principal directions of the pooled,
/// grand-mean-centered sample matrix. When k covers the rank of the centered
/// data the discriminant spectrum (and hence the score) is unchanged.
EmbeddingBatch reduce_dim(const EmbeddingBatch& batch, int k);

} // namespace lidar
