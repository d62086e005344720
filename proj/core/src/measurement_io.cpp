#include <fstream>

#include "nlcs/binary_io.hpp"
#include "nlcs/error.hpp"
#include "nlcs/sampling.hpp"

namespace nlcs {

namespace {
constexpr char kMagic[9] = "NLCSMEAS";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_measurements(std::ostream& out, const MeasurementSet& ms) {
  out.write(kMagic, 8);
  binary::put<std::uint32_t>(out, kVersion);
  binary::put<std::uint64_t>(out, ms.seed);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.block_size));
  binary::put<double>(out, ms.rate);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.width));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.height));
  for (Eigen::Index k = 0; k < ms.values.cols(); ++k) {
    for (Eigen::Index i = 0; i < ms.values.rows(); ++i) binary::put<double>(out, ms.values(i, k));
  }
  if (!out) throw IoError("failed writing measurements");
}

MeasurementSet read_measurements(std::istream& in) {
  std::size_t offset = 0;
  binary::expect_magic(in, offset, kMagic);
  const auto version_at = offset;
  const auto version = binary::get<std::uint32_t>(in, offset, "version");
  if (version != kVersion) {
    throw ParseError("unsupported measurement file version " + std::to_string(version), version_at);
  }
  MeasurementSet ms;
  ms.seed = binary::get<std::uint64_t>(in, offset, "seed");
  const auto block_at = offset;
  ms.block_size = static_cast<int>(binary::get<std::uint32_t>(in, offset, "block size"));
  const auto rate_at = offset;
  ms.rate = binary::get<double>(in, offset, "rate");
  ms.width = static_cast<int>(binary::get<std::uint32_t>(in, offset, "width"));
  ms.height = static_cast<int>(binary::get<std::uint32_t>(in, offset, "height"));
  if (ms.block_size < 1 || ms.block_size > 4096) throw ParseError("invalid block size", block_at);
  if (!(ms.rate > 0.0 && ms.rate <= 1.0)) throw ParseError("invalid sampling rate", rate_at);
  if (ms.width < 1 || ms.height < 1) throw ParseError("invalid image dimensions", rate_at + 8);

  const int rows = BlockMeasurementOperator::rows_for(ms.block_size, ms.rate);
  ms.values.resize(rows, ms.block_count());
  for (Eigen::Index k = 0; k < ms.values.cols(); ++k) {
    for (Eigen::Index i = 0; i < ms.values.rows(); ++i) {
      ms.values(i, k) = binary::get<double>(in, offset, "measurements");
    }
  }
  return ms;
}

void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_measurements(out, ms);
}

MeasurementSet read_measurements(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_measurements(in);
}

}  // namespace nlcs
