#include "nlcs/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlcs/error.hpp"

namespace nlcs {

double soft_threshold(double a, double t) noexcept {
  if (a > t) return a - t;
  if (a < -t) return a + t;
  return 0.0;
}

Vector soft_threshold(const Vector& a, double t) {
  return a.unaryExpr([t](double v) { return soft_threshold(v, t); });
}

Matrix soft_threshold(const Matrix& a, double t) {
  return a.unaryExpr([t](double v) { return soft_threshold(v, t); });
}

Vector hard_threshold(const Vector& a, double t) {
  return a.unaryExpr([t](double v) { return std::abs(v) > t ? v : 0.0; });
}

Matrix svt(const SpectralDecomposition& svd, double t) {
  return svd.compose(soft_threshold(svd.sigma, t).cwiseMax(0.0));
}

Matrix svt(const Matrix& x, double t) {
  if (t == 0.0) return x;
  return svt(decompose(x), t);
}

Matrix wnnm_shrink(const SpectralDecomposition& svd, const Vector& weights) {
  if (weights.size() != svd.sigma.size()) {
    throw ContractError("wnnm_shrink: weight count does not match singular value count");
  }
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (!(weights(j) >= 0.0)) throw ContractError("wnnm_shrink: weights must be nonnegative");
    if (j > 0 && weights(j) < weights(j - 1)) {
      throw ContractError("wnnm_shrink: weights must be sorted ascending");
    }
  }
  return svd.compose((svd.sigma - weights).cwiseMax(0.0));
}

Matrix wnnm_shrink(const Matrix& x, const Vector& weights) {
  return wnnm_shrink(decompose(x), weights);
}

Vector wnnm_weights(const Vector& sigma, double k, double eps) {
  if (k < 0.0) throw ContractError("wnnm_weights: k must be >= 0");
  if (!(eps > 0.0)) throw ContractError("wnnm_weights: eps must be > 0");
  return sigma.unaryExpr([k, eps](double s) { return k / (s + eps); });
}

Matrix truncate_rank(const Matrix& x, Eigen::Index r) {
  const Eigen::Index c = std::min(x.rows(), x.cols());
  if (r < 0 || r > c) throw ContractError("truncate_rank: rank outside [0, min(rows, cols)]");
  if (r == c) return x;
  if (r == 0) return Matrix::Zero(x.rows(), x.cols());
  const SpectralDecomposition svd = decompose(x);
  Vector kept = svd.sigma;
  kept.tail(c - r).setZero();
  return svd.compose(kept);
}

Vector rank_residual_values(const Vector& sigma, const Vector& psi, double t) {
  if (psi.size() != sigma.size()) {
    throw ContractError("rank_residual_shrink: reference spectrum has wrong length");
  }
  if (psi.size() > 0 && !(psi.minCoeff() >= 0.0)) {
    throw ContractError("rank_residual_shrink: reference spectrum must be nonnegative");
  }
  Vector out(sigma.size());
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    out(j) = std::max(psi(j) + soft_threshold(sigma(j) - psi(j), t), 0.0);
  }
  return out;
}

Matrix rank_residual_shrink(const Matrix& x, const Vector& psi, double t) {
  const SpectralDecomposition svd = decompose(x);
  return svd.compose(rank_residual_values(svd.sigma, psi, t));
}

Vector nlm_weights(const Matrix& group, double h) {
  if (!(h > 0.0)) throw ContractError("nlm_weights: h must be > 0");
  const Eigen::Index m = group.cols();
  Vector w(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    w(j) = std::exp(-(group.col(j) - group.col(0)).squaredNorm() / h);
  }
  // w(0) == 1, so the sum never underflows.
  return w / w.sum();
}

}  // namespace nlcs
