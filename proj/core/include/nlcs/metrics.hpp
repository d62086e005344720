#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlcs/image.hpp"

namespace nlcs {

struct Psnr {
  static constexpr double kIdenticalCap = 999.0;

  double db = 0.0;
  /// MSE was exactly zero; `db` holds the cap.
  bool identical = false;
};

/// 10 log10(255^2 / MSE) after clamping both inputs to [0, 255].
Psnr psnr(const Image& a, const Image& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
double ssim(const Image& a, const Image& b);

struct EvalResult {
  std::string image;
  std::string regularizer;
  double rate = 0.0;
  Psnr psnr;
  double ssim = 0.0;
  double runtime_s = 0.0;
};

/// Header `image,regularizer,rate,psnr,ssim,runtime_s`.
void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const EvalResult& r);
void write_results_csv(std::ostream& out, const std::vector<EvalResult>& rows);

}  // namespace nlcs
