#include "lidar/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace lidar {

double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

double max_abs(const Matrix& m) noexcept {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void check_symmetric(const Matrix& m, double sym_tol) {
    if (m.rows() != m.cols()) {
        raise(errc::not_symmetric, "matrix is " + std::to_string(m.rows()) + "x" +
                                       std::to_string(m.cols()) + ", not square");
    }
    const double scale = max_abs(m);
    const double worst = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (worst > sym_tol * scale) {
        raise(errc::not_symmetric, "max|M - M^T| = " + std::to_string(worst) +
                                       " exceeds tolerance " + std::to_string(sym_tol * scale));
    }
}

EigPair sym_eig(const Matrix& m, double neg_tol, double sym_tol) {
    if (!m.allFinite()) raise(errc::non_finite_input, "matrix has non-finite entries");
    if (neg_tol < 0.0) raise(errc::invariant_violation, "neg_tol must be >= 0");
    check_symmetric(m, sym_tol);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        raise(errc::non_finite_input, "eigendecomposition did not converge");
    }

    const int dim = static_cast<int>(m.rows());
    const double scale = max_abs(m);
    const double floor = -neg_tol * scale;

    EigPair out;
    out.spectrum.source_dim = dim;
    out.spectrum.values.resize(dim);
    out.vectors.resize(dim, dim);
    // Eigen returns ascending order; flip to descending and clamp round-off
    // negatives.
    for (int i = 0; i < dim; ++i) {
        const int src = dim - 1 - i;
        double v = solver.eigenvalues()(src);
        if (v < floor) {
            raise(errc::indefinite_beyond_tolerance,
                  "eigenvalue " + std::to_string(v) + " below -neg_tol*max|M| = " +
                      std::to_string(floor));
        }
        out.spectrum.values[i] = std::max(v, 0.0);
        out.vectors.col(i) = solver.eigenvectors().col(src);
    }
    return out;
}

Matrix inv_sqrt_psd(const Matrix& m, double neg_tol) {
    EigPair eig = sym_eig(m, neg_tol);
    const auto& values = eig.spectrum.values;
    if (values.empty() || values.back() <= 0.0) {
        raise(errc::singular_within_tolerance,
              "smallest eigenvalue is not positive; the within-scatter ridge is missing");
    }
    Vector d(values.size());
    for (size_t i = 0; i < values.size(); ++i) d(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(values[i]);
    Matrix r = eig.vectors * d.asDiagonal() * eig.vectors.transpose();
    return 0.5 * (r + r.transpose());
}

Spectrum singular_values(const Matrix& z) {
    if (z.rows() < 1 || z.cols() < 1) {
        raise(errc::bad_shape, "matrix must have at least one row and one column");
    }
    if (!z.allFinite()) raise(errc::non_finite_input, "matrix has non-finite entries");

    Eigen::BDCSVD<Matrix> svd(z);
    Spectrum s;
    s.source_dim = static_cast<int>(z.cols());
    s.values.assign(svd.singularValues().data(),
                    svd.singularValues().data() + svd.singularValues().size());
    for (double& v : s.values) v = std::max(v, 0.0);
    std::sort(s.values.begin(), s.values.end(), std::greater<>());
    return s;
}

SmoothRank smooth_rank(const Spectrum& s, double eps) {
    if (eps < 0.0) raise(errc::invariant_violation, "eps must be >= 0");
    for (double v : s.values) {
        if (!std::isfinite(v) || v < 0.0) {
            raise(errc::non_finite_input, "spectrum values must be finite and >= 0");
        }
    }

    const double mass = compensated_sum(s.values);
    if (mass <= 0.0) {
        if (eps == 0.0) return {1.0, true}; // complete collapse; not an error here
        // Literal formula with every p_i = eps.
        const double n = static_cast<double>(s.values.size());
        return {std::exp(-n * eps * std::log(eps)), false};
    }

    CompensatedSum entropy;
    for (double v : s.values) {
        const double pi = v / mass + eps;
        if (pi > 0.0) entropy.add(-pi * std::log(pi));
    }
    return {std::exp(entropy.value()), false};
}

} // namespace lidar
