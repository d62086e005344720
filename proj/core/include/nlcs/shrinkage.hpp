#pragma once

#include "nlcs/spectral.hpp"

namespace nlcs {

// Scalar and spectral proximal kernels shared by the group models.

Vector soft_threshold(const Vector& a, double t);
Matrix soft_threshold(const Matrix& a, double t);
double soft_threshold(double a, double t) noexcept;

/// Keeps an entry iff |a| > t.
Vector hard_threshold(const Vector& a, double t);

/// Prox of t * nuclear norm.
Matrix svt(const Matrix& x, double t);
Matrix svt(const SpectralDecomposition& svd, double t);

/// U diag(max(sigma - w, 0)) V^T. `w` must be nonnegative and nondecreasing
/// (ContractError otherwise); that ordering is what makes the closed form valid.
Matrix wnnm_shrink(const Matrix& x, const Vector& weights);
Matrix wnnm_shrink(const SpectralDecomposition& svd, const Vector& weights);

/// w_j = k / (sigma_j + eps); requires k >= 0 and eps > 0.
Vector wnnm_weights(const Vector& sigma, double k, double eps);

/// Best rank-r approximation (keeps the top r singular triplets).
Matrix truncate_rank(const Matrix& x, Eigen::Index r);

/// Shrinks the residual between the spectrum of X and a reference spectrum:
/// s_j = max(psi_j + soft(sigma_j - psi_j, t), 0).
Matrix rank_residual_shrink(const Matrix& x, const Vector& psi, double t);
Vector rank_residual_values(const Vector& sigma, const Vector& psi, double t);

/// Nonlocal-means weights of each column against column 0:
/// w_j proportional to exp(-||x_j - x_0||^2 / h), summing to one.
Vector nlm_weights(const Matrix& group, double h);

}  // namespace nlcs
