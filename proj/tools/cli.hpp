#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nlcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// seed xor FNV-1a of "image|rate|reg".
std::uint64_t cell_seed(std::uint64_t seed, const std::string& image, double rate,
                        const std::string& reg);

}  // namespace nlcs::cli
