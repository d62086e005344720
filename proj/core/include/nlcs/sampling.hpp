#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "nlcs/image.hpp"
#include "nlcs/rng.hpp"
#include "nlcs/spectral.hpp"

namespace nlcs {

/// Shared per-block Gaussian sensing matrix, M_B x B^2 with N(0, 1/M_B) entries.
///
/// The matrix is a pure function of (seed, rate, block size, ortho), so a
/// measurement file only needs to record those to rebuild it.
class BlockMeasurementOperator {
 public:
  BlockMeasurementOperator(int block_size, double rate, std::uint64_t seed, bool ortho = false);

  /// Test hook: wrap an explicit matrix (rows = M_B, cols = block_size^2).
  static BlockMeasurementOperator from_matrix(Matrix phi, int block_size, double rate,
                                              std::uint64_t seed = 0);

  static int rows_for(int block_size, double rate);

  int block_size() const noexcept { return block_size_; }
  int block_area() const noexcept { return block_size_ * block_size_; }
  int rows_per_block() const noexcept { return static_cast<int>(phi_.rows()); }
  double rate() const noexcept { return rate_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool ortho() const noexcept { return ortho_; }
  const Matrix& phi() const noexcept { return phi_; }

 private:
  BlockMeasurementOperator() = default;

  int block_size_ = 0;
  double rate_ = 0.0;
  std::uint64_t seed_ = 0;
  bool ortho_ = false;
  Matrix phi_;
};

/// Per-block measurement vectors stored as the columns of `values`, blocks in
/// raster order over the zero-padded image.
struct MeasurementSet {
  int width = 0;
  int height = 0;
  int block_size = 0;
  double rate = 0.0;
  std::uint64_t seed = 0;
  Matrix values;

  int blocks_down() const noexcept { return (height + block_size - 1) / block_size; }
  int blocks_across() const noexcept { return (width + block_size - 1) / block_size; }
  int block_count() const noexcept { return blocks_down() * blocks_across(); }
  int padded_width() const noexcept { return blocks_across() * block_size; }
  int padded_height() const noexcept { return blocks_down() * block_size; }
};

MeasurementSet sample(const Image& img, const BlockMeasurementOperator& op);

/// Adds i.i.d. N(0, sigma^2) to every measurement; block k uses substream k.
void add_measurement_noise(MeasurementSet& ms, double sigma, const Rng& rng);

/// Per block phi^T y_k, padding cropped. OperatorMismatchError if `ms` was not
/// produced by an operator with the same metadata.
Image adjoint(const MeasurementSet& ms, const BlockMeasurementOperator& op);

void check_compatible(const MeasurementSet& ms, const BlockMeasurementOperator& op);

/// Vectorized block k of an image (row-major inside the block, zero outside).
Vector block_vector(const Image& img, int block_size, int block_index);
void scatter_block(Image& img, int block_size, int block_index, const Vector& values);

/// argmin_x 1/2 ||y - phi x||^2 + eta/2 ||x - z||^2, solved through the small
/// M_B x M_B system (phi phi^T + eta I) as x = z + phi^T (phi phi^T + eta I)^-1 (y - phi z).
/// eta = 0 is only accepted for a square phi (RankDeficiencyError otherwise)
/// and then returns phi^-1 y.
class BlockDataUpdate {
 public:
  BlockDataUpdate(const BlockMeasurementOperator& op, double eta);

  Vector operator()(const Vector& z_block, const Vector& y_block) const;

  /// Apply to every block of an image estimate.
  Image apply(const Image& z, const MeasurementSet& ms) const;

  double eta() const noexcept { return eta_; }

 private:
  Matrix phi_;
  int block_size_;
  double eta_;
  Eigen::LLT<Matrix> gram_;
  Eigen::PartialPivLU<Matrix> exact_;  // eta == 0 with a square phi
};

Vector block_data_update(const Vector& z_block, const Vector& y_block,
                         const BlockMeasurementOperator& op, double eta);

/// Per-block minimum-norm solution phi^T (phi phi^T)^-1 y_k; a 1e-10 ridge is
/// added when the Gram matrix is numerically singular.
Image minimum_norm_solution(const MeasurementSet& ms, const BlockMeasurementOperator& op);

// Measurement file: magic "NLCSMEAS", u32 version, u64 seed, u32 B, f64 rate,
// u32 width, u32 height, then f64 values in block raster order (little-endian).
void write_measurements(std::ostream& out, const MeasurementSet& ms);
MeasurementSet read_measurements(std::istream& in);
void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms);
MeasurementSet read_measurements(const std::filesystem::path& path);

}  // namespace nlcs
