#include "nlcs/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlcs/error.hpp"

namespace nlcs {

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DimensionError("negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw DimensionError("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image Image::clamped(double lo, double hi) const {
  Image out = *this;
  for (double& v : out.data_) v = std::clamp(v, lo, hi);
  return out;
}

Image Image::quantized() const {
  Image out = clamped();
  for (double& v : out.data_) v = std::round(v);
  return out;
}

Image Image::crop(int row, int col, int width, int height) const {
  if (row < 0 || col < 0 || width < 0 || height < 0 || row + height > height_ ||
      col + width > width_) {
    throw DimensionError("crop window outside image");
  }
  Image out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out(r, c) = (*this)(row + r, col + c);
  }
  return out;
}

Patch extract_patch(const Image& img, int row, int col, int side) {
  if (side <= 0 || row < 0 || col < 0 || row + side > img.height() || col + side > img.width()) {
    throw DimensionError("patch outside image bounds");
  }
  Patch p{side, row, col, Eigen::VectorXd(side * side)};
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) p.values(r * side + c) = img(row + r, col + c);
  }
  return p;
}

}  // namespace nlcs
