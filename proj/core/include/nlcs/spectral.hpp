#pragma once

#include <Eigen/Core>

namespace nlcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD X = U diag(sigma) V^T with c = min(rows, cols) triplets.
///
/// Invariants: U^T U = V^T V = I, sigma nonnegative and nonincreasing.
/// Singular values below `kRelativeZero * sigma_max` are stored as exact zeros
/// and their left vectors are an orthonormal completion.
struct SpectralDecomposition {
  Matrix u;
  Vector sigma;
  Matrix v;

  static constexpr double kRelativeZero = 1e-10;

  Eigen::Index rank() const;
  /// U diag(values) V^T.
  Matrix compose(const Vector& values) const;
};

/// Computed from the eigendecomposition of the smaller Gram matrix; left
/// vectors are recovered as X v / sigma and re-orthonormalized.
SpectralDecomposition decompose(const Matrix& x);

Vector singular_values(const Matrix& x);

/// Complete the first `valid` orthonormal columns of `q` to a full orthonormal
/// set using the canonical basis (Gram-Schmidt, twice for stability).
void complete_orthonormal(Matrix& q, Eigen::Index valid);

double nuclear_norm(const Matrix& x);

}  // namespace nlcs
