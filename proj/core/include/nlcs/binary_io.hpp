#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "nlcs/error.hpp"

namespace nlcs::binary {

// Little-endian scalar encoding shared by the measurement and GMM formats.

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

/// Reads a value or throws ParseError at the current offset.
template <class T>
T get(std::istream& in, std::size_t& offset, const char* what) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw ParseError(std::string("truncated file while reading ") + what, offset);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  offset += sizeof(T);
  return value;
}

inline void expect_magic(std::istream& in, std::size_t& offset, const char (&magic)[9]) {
  char buf[8] = {};
  in.read(buf, 8);
  if (in.gcount() != 8 || std::memcmp(buf, magic, 8) != 0) {
    throw ParseError(std::string("bad magic, expected ") + magic, offset);
  }
  offset += 8;
}

}  // namespace nlcs::binary
