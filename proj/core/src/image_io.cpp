#include "nlcs/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "nlcs/error.hpp"

#if defined(NLCS_WITH_PNG) && NLCS_WITH_PNG
#include <png.h>
#endif

namespace nlcs {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what, start);
    return v;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance() { ++pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  return out;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

Image read_pgm(std::istream& in) {
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PGM file: missing magic", 0);
  if (bytes[1] != '5') {
    throw UnsupportedFormatError("only binary PGM (P5) is supported");
  }
  HeaderReader hr(bytes);
  hr.advance();
  hr.advance();
  const std::size_t after_magic = hr.pos();
  if (after_magic >= bytes.size() || !(std::isspace(bytes[after_magic]) || bytes[after_magic] == '#')) {
    throw ParseError("PGM header: expected whitespace after magic", after_magic);
  }
  const std::size_t width_at = hr.pos();
  const long long w = hr.number("width");
  const long long h = hr.number("height");
  const std::size_t maxval_at = hr.pos();
  const long long maxval = hr.number("maxval");
  if (w <= 0 || h <= 0) throw ParseError("PGM header: zero dimension", width_at);
  if (maxval > 255) {
    throw UnsupportedFormatError("PGM maxval " + std::to_string(maxval) + " is not supported (8-bit only)");
  }
  if (maxval != 255) {
    throw UnsupportedFormatError("PGM maxval " + std::to_string(maxval) + " is not supported (expected 255)");
  }
  if (hr.pos() >= bytes.size() || !std::isspace(bytes[hr.pos()])) {
    throw ParseError("PGM header: expected single whitespace after maxval", std::max(hr.pos(), maxval_at));
  }
  hr.advance();
  const std::size_t data_at = hr.pos();
  const auto count = static_cast<std::size_t>(w * h);
  if (bytes.size() - data_at < count) {
    throw ParseError("PGM pixel data truncated: need " + std::to_string(count) + " bytes", bytes.size());
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = bytes[data_at + i];
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

Image read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_pgm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_pgm(std::ostream& out, const Image& img) {
  if (img.empty()) throw DimensionError("cannot write an empty image");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<char> data(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<char>(to_byte(px[i]));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("PGM write failed");
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  auto out = open_out(path);
  write_pgm(out, img);
}

#if defined(NLCS_WITH_PNG) && NLCS_WITH_PNG

bool png_supported() noexcept { return true; }

Image read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(path.string() + ": " + image.message);
  }
  std::vector<double> values(buf.begin(), buf.end());
  return Image(static_cast<int>(image.width), static_cast<int>(image.height), std::move(values));
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.empty()) throw DimensionError("cannot write an empty image");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(px[i]);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + image.message);
  }
}

#else

bool png_supported() noexcept { return false; }

Image read_png(const std::filesystem::path& path) {
  throw UnsupportedFormatError(path.string() + ": PNG support not compiled in (NLCS_WITH_PNG=OFF)");
}

void write_png(const std::filesystem::path& path, const Image&) {
  throw UnsupportedFormatError(path.string() + ": PNG support not compiled in (NLCS_WITH_PNG=OFF)");
}

#endif

Image read_image(const std::filesystem::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw UnsupportedFormatError(path.string() + ": unknown image extension");
}

void write_image(const std::filesystem::path& path, const Image& img) {
  const auto ext = lower_extension(path);
  if (ext == ".pgm") return write_pgm(path, img);
  if (ext == ".png") return write_png(path, img);
  throw UnsupportedFormatError(path.string() + ": unknown image extension");
}

}  // namespace nlcs
