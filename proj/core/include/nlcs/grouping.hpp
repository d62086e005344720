#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "nlcs/config.hpp"
#include "nlcs/image.hpp"
#include "nlcs/spectral.hpp"

namespace nlcs {

struct PatchOrigin {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const PatchOrigin&, const PatchOrigin&) = default;
};

/// One exemplar and its nearest patches, sorted by ascending distance.
/// members[0] is always the exemplar itself.
struct PatchGroup {
  std::size_t exemplar_index = 0;
  std::vector<PatchOrigin> members;
  std::vector<double> distances;  // squared Euclidean, same order as members
};

struct GroupingParams {
  int patch_side = 8;
  int group_size = 60;
  int search_window = 40;
  int patch_stride = 4;

  static GroupingParams from(const SolverConfig& cfg) noexcept {
    return {cfg.patch_side, cfg.group_size, cfg.search_window, cfg.patch_stride};
  }
};

struct GroupPlan {
  int width = 0;
  int height = 0;
  int patch_side = 0;
  int requested_group_size = 0;
  /// True when some window held fewer candidates than requested.
  bool group_size_shrunk = false;
  std::vector<PatchGroup> groups;
};

/// Exemplar grid positions along one axis: 0, stride, 2*stride, ... plus the
/// last valid origin so that every pixel is covered.
std::vector<int> exemplar_positions(int extent, int side, int stride);

/// Exhaustive block matching inside a search window clamped to the image.
/// Ties are broken by raster order of the candidate origin.
GroupPlan extract_groups(const Image& img, const GroupingParams& params, int threads = 1);
GroupPlan extract_groups(const Image& img, const SolverConfig& cfg, int threads = 1);

/// b x m matrix whose column j is the row-major patch at members[j].
Matrix group_matrix(const Image& img, const PatchGroup& group, int patch_side);
std::vector<Matrix> group_matrices(const Image& img, const GroupPlan& plan);

/// Deposit processed groups back and average every pixel by its coverage count.
Image aggregate(const GroupPlan& plan, std::span<const Matrix> processed);

}  // namespace nlcs
