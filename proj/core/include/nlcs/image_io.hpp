#pragma once

#include <filesystem>
#include <iosfwd>

#include "nlcs/image.hpp"

namespace nlcs {

/// Binary P5, maxval 255. Maxval above 255 raises UnsupportedFormatError;
/// header problems raise ParseError with the byte offset.
Image read_pgm(std::istream& in);
Image read_pgm(const std::filesystem::path& path);

/// Values are clamped and rounded to 8 bits.
void write_pgm(std::ostream& out, const Image& img);
void write_pgm(const std::filesystem::path& path, const Image& img);

bool png_supported() noexcept;
/// Only available when built with NLCS_WITH_PNG; UnsupportedFormatError otherwise.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

/// Dispatch on extension (.pgm, .png).
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace nlcs
