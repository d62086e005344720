#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "nlcs/image.hpp"
#include "nlcs/rng.hpp"
#include "nlcs/spectral.hpp"

namespace nlcs {

/// Orthonormal PCA basis of a mean-centered group (b x c, c = min(b, m)).
struct PcaDictionary {
  Matrix basis;
  Vector mean;
  /// Set when the centered group is identically zero; the basis is then the
  /// canonical completion.
  bool degenerate = false;

  Matrix codes(const Matrix& x) const;
  Matrix reconstruct(const Matrix& codes) const;
};

PcaDictionary pca_dictionary(const Matrix& x);

/// Rank-one atoms u_j v_j^T from the SVD of a group; the codes are the
/// singular values, so the atoms are Frobenius-orthonormal.
struct RankOneDictionary {
  SpectralDecomposition svd;

  Eigen::Index size() const noexcept { return svd.sigma.size(); }
  const Vector& codes() const noexcept { return svd.sigma; }
  Matrix atom(Eigen::Index j) const;
  /// sum_j codes_j * atom_j
  Matrix reconstruct(const Vector& codes) const;
};

RankOneDictionary rank_one_dictionary(const Matrix& x);

struct GaussianComponent {
  double weight = 0.0;
  Vector mean;
  /// Covariance eigenvalues, nonincreasing, >= 0.
  Vector eigenvalues;
  /// Orthonormal b x b eigenvectors; column j pairs with eigenvalues[j].
  Matrix basis;
};

/// Mixture of Gaussians over patch vectors whose eigenbases serve as external
/// PCA sub-dictionaries.
class ExternalGMM {
 public:
  /// Eigenvalues are floored at this value inside every density.
  static constexpr double kCovarianceFloor = 1e-6;

  ExternalGMM() = default;
  explicit ExternalGMM(std::vector<GaussianComponent> components);

  int size() const noexcept { return static_cast<int>(components_.size()); }
  int dim() const noexcept;
  const GaussianComponent& component(int k) const { return components_.at(static_cast<std::size_t>(k)); }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }

  double log_density(const Vector& x, int k) const;
  /// sum over columns of log N(col; mu_k, Sigma_k).
  double group_log_density(const Matrix& group, int k) const;

 private:
  std::vector<GaussianComponent> components_;
  std::vector<double> log_norm_;  // -1/2 (b log 2pi + log det)
};

struct GmmTrainingOptions {
  int components = 32;
  int em_iters = 30;
  int max_reseeds = 3;
};

struct GmmTrainingReport {
  /// Total group log-likelihood: initial E-step, then one entry per EM iteration.
  std::vector<double> log_likelihood;
  int reseeds = 0;
  /// Hard component index of each training group after the last E-step.
  std::vector<int> assignments;
};

/// EM with group-level responsibilities: every column of a group shares the
/// group's component posterior.
ExternalGMM train_gmm(std::span<const Matrix> groups, const GmmTrainingOptions& options,
                      Rng& rng, GmmTrainingReport* report = nullptr);

struct SubdictionaryChoice {
  int component = 0;
  const Matrix* basis = nullptr;
};

/// Component maximizing sum_cols log N(col; mu_k, Sigma_k) + log pi_k; the
/// lowest index wins ties.
SubdictionaryChoice select_subdictionary(const ExternalGMM& gmm, const Matrix& group);

/// Block-matched, mean-removed groups sampled from a set of images, capped at
/// `max_patches` columns in total.
std::vector<Matrix> collect_training_groups(std::span<const Image> images, int patch_side,
                                            int group_size, int search_window,
                                            std::size_t max_patches, Rng& rng);

// GMM file: magic "NLCSGMM1", u32 M, u32 b, then per component f64 weight,
// b f64 mean, b f64 eigenvalues, b*b f64 basis (row-major), little-endian.
void write_gmm(std::ostream& out, const ExternalGMM& gmm);
ExternalGMM read_gmm(std::istream& in);
void write_gmm(const std::filesystem::path& path, const ExternalGMM& gmm);
ExternalGMM read_gmm(const std::filesystem::path& path);

}  // namespace nlcs
