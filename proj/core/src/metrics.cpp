#include "nlcs/metrics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <vector>

#include "nlcs/error.hpp"

namespace nlcs {

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError("images differ in size: " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering: output is (h - 2r) x (w - 2r).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int ow = w - 2 * r;
  const int oh = h - 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) acc += k[i] * src[y * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) acc += k[i] * tmp[(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Psnr psnr(const Image& a, const Image& b) {
  require_same_shape(a, b);
  if (a.empty()) throw DimensionError("PSNR of empty images");
  const Image ca = a.clamped();
  const Image cb = b.clamped();
  const double mse = (ca.as_vector() - cb.as_vector()).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return {Psnr::kIdenticalCap, true};
  return {10.0 * std::log10(255.0 * 255.0 / mse), false};
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b);
  constexpr int kRadius = 5;
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const int w = a.width();
  const int h = a.height();
  if (w < 2 * kRadius + 1 || h < 2 * kRadius + 1) {
    throw DimensionError("SSIM needs images of at least 11x11");
  }
  const Image ca = a.clamped();
  const Image cb = b.clamped();
  std::vector<double> x(ca.pixels().begin(), ca.pixels().end());
  std::vector<double> y(cb.pixels().begin(), cb.pixels().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = gaussian_kernel(kRadius, 1.5);
  const auto mx = filter_valid(x, w, h, k);
  const auto my = filter_valid(y, w, h, k);
  const auto sxx = filter_valid(xx, w, h, k);
  const auto syy = filter_valid(yy, w, h, k);
  const auto sxy = filter_valid(xy, w, h, k);

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

void write_results_header(std::ostream& out) { out << "image,regularizer,rate,psnr,ssim,runtime_s\n"; }

void write_result_row(std::ostream& out, const EvalResult& r) {
  out << r.image << ',' << r.regularizer << ',' << format_double(r.rate) << ','
      << format_double(r.psnr.db) << ',' << format_double(r.ssim) << ','
      << format_double(r.runtime_s) << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<EvalResult>& rows) {
  write_results_header(out);
  for (const auto& r : rows) write_result_row(out, r);
}

}  // namespace nlcs
