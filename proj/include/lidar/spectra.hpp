#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lidar/error.hpp"

namespace lidar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultNegTol = 1e-10; // relative clamp window for round-off negatives
inline constexpr double kDefaultSymTol = 1e-8;  // relative symmetry tolerance
inline constexpr double kDefaultEps = 1e-8;     // smooth-rank constant
inline constexpr double kDefaultDelta = 1e-4;   // within-scatter ridge

/// Sorted nonnegative eigen- or singular values together with the ambient
/// dimension they were computed in.
struct Spectrum {
    std::vector<double> values; // finite, sorted non-increasing, >= 0
    int source_dim = 0;
};

struct EigPair {
    Spectrum spectrum; // descending, round-off negatives clamped to 0
    Matrix vectors;    // column i pairs with spectrum.values[i]; orthonormal
};

/// Streaming Neumaier-compensated accumulator. Reductions through this are
/// reproducible run to run and keep cancellations below 1e-12 relative.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

double max_abs(const Matrix& m) noexcept;

/// Throws NotSymmetric unless max|M - M^T| <= sym_tol * max|M|.
void check_symmetric(const Matrix& m, double sym_tol = kDefaultSymTol);

/// Dense symmetric eigendecomposition with descending eigenvalues.
/// Eigenvalues in [-neg_tol*max|m|, 0) are clamped to 0; anything below that
/// window raises IndefiniteBeyondTolerance.
EigPair sym_eig(const Matrix& m, double neg_tol = kDefaultNegTol,
                double sym_tol = kDefaultSymTol);

/// Inverse square root of a symmetric positive definite matrix.
/// The result R satisfies R*m*R ~ I; raises SingularWithinTolerance when the
/// smallest eigenvalue is not strictly positive after clamping (the caller
/// forgot the ridge).
Matrix inv_sqrt_psd(const Matrix& m, double neg_tol = kDefaultNegTol);

/// Singular values of a rectangular matrix, descending; min(rows, cols) of
/// them, source_dim = cols.
Spectrum singular_values(const Matrix& z);

struct SmoothRank {
    double value = 1.0;
    bool degenerate = false; // spectrum had zero mass and eps == 0
};

/// Entropy-based smooth rank: exp(-sum p_i log p_i) with
/// p_i = v_i / ||v||_1 + eps, computed literally (the p_i sum to
/// 1 + len(v)*eps; no renormalization). Zero terms follow the x log x -> 0
/// convention. A zero-mass spectrum at eps = 0 reports value 1 with the
/// degenerate flag set; callers decide whether that is an error.
SmoothRank smooth_rank(const Spectrum& s, double eps);

} // namespace lidar
