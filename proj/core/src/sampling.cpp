#include "nlcs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "nlcs/error.hpp"

namespace nlcs {

namespace {

constexpr std::uint64_t kPhiStream = 0x5048490000000001ULL;

}  // namespace

int BlockMeasurementOperator::rows_for(int block_size, double rate) {
  const long area = static_cast<long>(block_size) * block_size;
  return static_cast<int>(std::clamp(std::lround(rate * static_cast<double>(area)), 1L, area));
}

BlockMeasurementOperator::BlockMeasurementOperator(int block_size, double rate,
                                                   std::uint64_t seed, bool ortho)
    : block_size_(block_size), rate_(rate), seed_(seed), ortho_(ortho) {
  if (block_size < 1) throw ConfigError("block size must be >= 1");
  if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("sampling rate must lie in (0, 1]");
  const int rows = rows_for(block_size, rate);
  const int cols = block_area();

  Rng rng = Rng(seed).substream(kPhiStream);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  phi_.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) phi_(r, c) = scale * rng.gaussian();
  }

  if (ortho) {
    Eigen::HouseholderQR<Matrix> qr(phi_.transpose());
    Matrix q = qr.householderQ() * Matrix::Identity(cols, rows);
    phi_ = q.transpose();
  }
}

BlockMeasurementOperator BlockMeasurementOperator::from_matrix(Matrix phi, int block_size,
                                                               double rate, std::uint64_t seed) {
  if (phi.cols() != static_cast<Eigen::Index>(block_size) * block_size || phi.rows() < 1 ||
      phi.rows() > phi.cols()) {
    throw DimensionError("sensing matrix shape does not match block size");
  }
  BlockMeasurementOperator op;
  op.block_size_ = block_size;
  op.rate_ = rate;
  op.seed_ = seed;
  op.phi_ = std::move(phi);
  return op;
}

Vector block_vector(const Image& img, int block_size, int block_index) {
  const int across = (img.width() + block_size - 1) / block_size;
  const int r0 = (block_index / across) * block_size;
  const int c0 = (block_index % across) * block_size;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(block_size) * block_size);
  const int rmax = std::min(block_size, img.height() - r0);
  const int cmax = std::min(block_size, img.width() - c0);
  for (int r = 0; r < rmax; ++r) {
    for (int c = 0; c < cmax; ++c) v(r * block_size + c) = img(r0 + r, c0 + c);
  }
  return v;
}

void scatter_block(Image& img, int block_size, int block_index, const Vector& values) {
  const int across = (img.width() + block_size - 1) / block_size;
  const int r0 = (block_index / across) * block_size;
  const int c0 = (block_index % across) * block_size;
  const int rmax = std::min(block_size, img.height() - r0);
  const int cmax = std::min(block_size, img.width() - c0);
  for (int r = 0; r < rmax; ++r) {
    for (int c = 0; c < cmax; ++c) img(r0 + r, c0 + c) = values(r * block_size + c);
  }
}

MeasurementSet sample(const Image& img, const BlockMeasurementOperator& op) {
  MeasurementSet ms;
  ms.width = img.width();
  ms.height = img.height();
  ms.block_size = op.block_size();
  ms.rate = op.rate();
  ms.seed = op.seed();
  const int blocks = ms.block_count();
  ms.values.resize(op.rows_per_block(), blocks);
  for (int k = 0; k < blocks; ++k) {
    ms.values.col(k).noalias() = op.phi() * block_vector(img, op.block_size(), k);
  }
  return ms;
}

void add_measurement_noise(MeasurementSet& ms, double sigma, const Rng& rng) {
  if (sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (sigma == 0.0) return;
  for (Eigen::Index k = 0; k < ms.values.cols(); ++k) {
    Rng block_rng = rng.substream(static_cast<std::uint64_t>(k));
    for (Eigen::Index i = 0; i < ms.values.rows(); ++i) ms.values(i, k) += sigma * block_rng.gaussian();
  }
}

void check_compatible(const MeasurementSet& ms, const BlockMeasurementOperator& op) {
  if (ms.block_size != op.block_size() || ms.seed != op.seed() || ms.rate != op.rate() ||
      ms.values.rows() != op.rows_per_block() || ms.values.cols() != ms.block_count()) {
    throw OperatorMismatchError("measurement metadata does not match the sensing operator");
  }
}

Image adjoint(const MeasurementSet& ms, const BlockMeasurementOperator& op) {
  check_compatible(ms, op);
  Image out(ms.width, ms.height);
  for (int k = 0; k < ms.block_count(); ++k) {
    scatter_block(out, ms.block_size, k, op.phi().transpose() * ms.values.col(k));
  }
  return out;
}

BlockDataUpdate::BlockDataUpdate(const BlockMeasurementOperator& op, double eta)
    : phi_(op.phi()), block_size_(op.block_size()), eta_(eta) {
  if (eta < 0.0) throw ConfigError("eta must be >= 0");
  if (eta == 0.0) {
    if (phi_.rows() < phi_.cols()) {
      throw RankDeficiencyError(
          "eta = 0 requires a square sensing matrix (sampling rate 1); the data update is "
          "underdetermined");
    }
    exact_.compute(phi_);
    if (!(std::abs(exact_.determinant()) > 0.0) || !exact_.solve(phi_).allFinite()) {
      throw RankDeficiencyError("sensing matrix is singular");
    }
    return;
  }
  Matrix gram = phi_ * phi_.transpose();
  gram.diagonal().array() += eta;
  gram_.compute(gram);
  if (gram_.info() != Eigen::Success) throw RankDeficiencyError("data update system is singular");
}

Vector BlockDataUpdate::operator()(const Vector& z_block, const Vector& y_block) const {
  if (eta_ == 0.0) return exact_.solve(y_block);
  const Vector residual = y_block - phi_ * z_block;
  return z_block + phi_.transpose() * gram_.solve(residual);
}

Image BlockDataUpdate::apply(const Image& z, const MeasurementSet& ms) const {
  if (ms.block_size != block_size_ || ms.values.rows() != phi_.rows()) {
    throw OperatorMismatchError("measurement metadata does not match the data update");
  }
  if (z.width() != ms.width || z.height() != ms.height) {
    throw DimensionError("estimate dimensions do not match measurements");
  }
  Image out(ms.width, ms.height);
  for (int k = 0; k < ms.block_count(); ++k) {
    scatter_block(out, block_size_, k, (*this)(block_vector(z, block_size_, k), ms.values.col(k)));
  }
  return out;
}

Vector block_data_update(const Vector& z_block, const Vector& y_block,
                         const BlockMeasurementOperator& op, double eta) {
  return BlockDataUpdate(op, eta)(z_block, y_block);
}

Image minimum_norm_solution(const MeasurementSet& ms, const BlockMeasurementOperator& op) {
  check_compatible(ms, op);
  const Matrix& phi = op.phi();
  Image out(ms.width, ms.height);

  // phi^T = Q R gives x = Q R^-T y without squaring the condition number.
  Eigen::HouseholderQR<Matrix> qr(phi.transpose());
  const Eigen::Index rows = phi.rows();
  const auto r = qr.matrixQR().topLeftCorner(rows, rows).triangularView<Eigen::Upper>();
  const double rmax = qr.matrixQR().diagonal().cwiseAbs().maxCoeff();
  const double rmin = qr.matrixQR().diagonal().cwiseAbs().minCoeff();

  if (rmax > 0.0 && rmin > 1e-12 * rmax) {
    const Matrix q = qr.householderQ() * Matrix::Identity(phi.cols(), rows);
    for (int k = 0; k < ms.block_count(); ++k) {
      const Vector t = r.transpose().solve(ms.values.col(k));
      scatter_block(out, ms.block_size, k, q * t);
    }
    return out;
  }

  // Duplicate or dependent rows: ridge-regularized Gram system.
  Matrix gram = phi * phi.transpose();
  gram.diagonal().array() += 1e-10;
  Eigen::LDLT<Matrix> ldlt(gram);
  for (int k = 0; k < ms.block_count(); ++k) {
    scatter_block(out, ms.block_size, k, phi.transpose() * ldlt.solve(ms.values.col(k)));
  }
  return out;
}

}  // namespace nlcs
