#include "nlcs/spectral.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

namespace nlcs {

namespace {

// Left vectors X v_j / sigma_j lose orthogonality roughly like
// eps * sigma_max / sigma_j; below this ratio they are re-orthogonalized.
constexpr double kReorthRatio = 1e-3;

void orthogonalize_against(Matrix& q, Eigen::Index j, Eigen::Index upto) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < upto; ++k) {
      q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    }
  }
}

SpectralDecomposition decompose_tall(const Matrix& x) {
  const Eigen::Index n = x.cols();
  SpectralDecomposition out;
  if (n == 0) {
    out.u = Matrix(x.rows(), 0);
    out.v = Matrix(0, 0);
    out.sigma = Vector(0);
    return out;
  }

  const Matrix gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  // Eigenvalues come ascending; flip to descending.
  Matrix v = eig.eigenvectors().rowwise().reverse();
  Matrix w = x * v;

  Vector sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = w.col(j).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return sigma(a) > sigma(b); });

  out.sigma.resize(n);
  out.v.resize(n, n);
  out.u.resize(x.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.sigma(j) = sigma(src);
    out.v.col(j) = v.col(src);
    out.u.col(j) = w.col(src);
  }

  const double smax = out.sigma(0);
  Eigen::Index valid = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (smax <= 0.0 || out.sigma(j) <= SpectralDecomposition::kRelativeZero * smax) break;
    out.u.col(j) /= out.sigma(j);
    if (out.sigma(j) < kReorthRatio * smax) {
      orthogonalize_against(out.u, j, j);
      const double norm = out.u.col(j).norm();
      if (norm < 0.5) break;
      out.u.col(j) /= norm;
    }
    ++valid;
  }
  out.sigma.tail(n - valid).setZero();
  complete_orthonormal(out.u, valid);
  return out;
}

}  // namespace

Eigen::Index SpectralDecomposition::rank() const {
  return (sigma.array() > 0.0).count();
}

Matrix SpectralDecomposition::compose(const Vector& values) const {
  return u * values.asDiagonal() * v.transpose();
}

SpectralDecomposition decompose(const Matrix& x) {
  if (x.rows() >= x.cols()) return decompose_tall(x);
  SpectralDecomposition t = decompose_tall(x.transpose());
  std::swap(t.u, t.v);
  return t;
}

Vector singular_values(const Matrix& x) { return decompose(x).sigma; }

void complete_orthonormal(Matrix& q, Eigen::Index valid) {
  for (Eigen::Index j = valid; j < q.cols(); ++j) {
    // Canonical vector with the largest residual against the columns so far.
    const Vector residual =
        (1.0 - q.leftCols(j).rowwise().squaredNorm().array()).matrix();
    Eigen::Index pick = 0;
    residual.maxCoeff(&pick);
    q.col(j).setZero();
    q(pick, j) = 1.0;
    orthogonalize_against(q, j, j);
    q.col(j).normalize();
  }
}

double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

}  // namespace nlcs
