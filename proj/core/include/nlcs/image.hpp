#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nlcs {

/// Grayscale image with row-major real intensities on the 8-bit scale [0, 255].
///
/// Values produced by reconstruction may leave that range; `clamped()` maps them
/// back before quantization or PSNR.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(int row, int col) const { return data_[index(row, col)]; }
  double& operator()(int row, int col) { return data_[index(row, col)]; }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXd> as_vector() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  bool all_finite() const;
  Image clamped(double lo = 0.0, double hi = 255.0) const;
  /// Clamp then round to the nearest integer level.
  Image quantized() const;
  Image crop(int row, int col, int width, int height) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// A square patch cut from an image; `values` is row-major, side*side long.
struct Patch {
  int side = 0;
  int row = 0;
  int col = 0;
  Eigen::VectorXd values;
};

Patch extract_patch(const Image& img, int row, int col, int side);

}  // namespace nlcs
