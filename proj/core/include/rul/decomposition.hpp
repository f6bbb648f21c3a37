#pragma once

#include "rul/features.hpp"
#include "rul/matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rul {

/// Eigenpairs of a symmetric matrix. `vectors` holds one eigenvector per
/// row, ordered by descending eigenvalue.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `tolerance` times the full Frobenius norm. Equal eigenvalues keep their
/// diagonal order.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12, int max_sweeps = 100);

/// Fitted principal axes of an engineered feature matrix.
struct PcaModel {
    std::vector<std::string> column_names;
    bool standardize = true;
    std::size_t fit_rows = 0;
    std::vector<double> feature_means;
    std::vector<double> feature_scales; // 1 when standardize is off
    Matrix components;                  // p x p, rows are axes
    std::vector<double> eigenvalues;    // descending, >= 0
    std::vector<double> explained_variance_ratio;

    std::size_t dimension() const noexcept { return feature_means.size(); }
    std::vector<double> cumulative_ratio() const;
};

/// Centers (and optionally z-scores) the data, forms the sample covariance
/// with compensated accumulation, and diagonalizes it with `jacobi_eigen`.
/// Each axis is signed so its largest-magnitude loading is positive.
PcaModel fit_pca(const Matrix& data, bool standardize = true,
                 std::vector<std::string> column_names = {});
PcaModel fit_pca(const FeatureMatrix& features, bool standardize = true);

/// Sample covariance (n-1 denominator) of the centered/scaled data.
Matrix standardized_covariance(const Matrix& data, std::span<const double> means,
                               std::span<const double> scales);

Matrix transform(const PcaModel& model, const Matrix& data, std::size_t k);
Matrix transform(const PcaModel& model, const FeatureMatrix& features, std::size_t k);

/// Least-squares reconstruction from the first `projected.cols()` scores.
Matrix inverse_transform(const PcaModel& model, const Matrix& projected);

/// Smallest k whose cumulative explained-variance ratio reaches `threshold`.
std::size_t select_components(const PcaModel& model, double threshold);

} // namespace rul
