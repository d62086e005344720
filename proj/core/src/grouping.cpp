#include "nlcs/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nlcs/error.hpp"
#include "nlcs/parallel.hpp"

namespace nlcs {

namespace {

struct Window {
  int first = 0;  // first candidate origin
  int count = 0;  // number of candidate origins
};

// Window of `window` pixels centered on the exemplar, shifted to stay inside [0, extent).
Window search_range(int origin, int extent, int side, int window) {
  const int span = std::min(window, extent);
  const int first = std::clamp(origin - (span - side) / 2, 0, extent - span);
  return {first, span - side + 1};
}

double patch_distance(const Image& img, int r0, int c0, int r1, int c1, int side) {
  double d = 0.0;
  for (int r = 0; r < side; ++r) {
    const double* a = &img.pixels()[static_cast<std::size_t>(r0 + r) * img.width() + c0];
    const double* b = &img.pixels()[static_cast<std::size_t>(r1 + r) * img.width() + c1];
    for (int c = 0; c < side; ++c) {
      const double diff = a[c] - b[c];
      d += diff * diff;
    }
  }
  return d;
}

PatchGroup match_exemplar(const Image& img, const GroupingParams& p, std::size_t index,
                          PatchOrigin exemplar) {
  const Window rows = search_range(exemplar.row, img.height(), p.patch_side, p.search_window);
  const Window cols = search_range(exemplar.col, img.width(), p.patch_side, p.search_window);

  struct Candidate {
    double distance;
    int order;  // raster position inside the window
    PatchOrigin origin;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(rows.count) * cols.count);
  int order = 0;
  for (int r = rows.first; r < rows.first + rows.count; ++r) {
    for (int c = cols.first; c < cols.first + cols.count; ++c, ++order) {
      if (r == exemplar.row && c == exemplar.col) continue;
      candidates.push_back(
          {patch_distance(img, exemplar.row, exemplar.col, r, c, p.patch_side), order, {r, c}});
    }
  }

  const std::size_t wanted =
      std::min(static_cast<std::size_t>(p.group_size) - 1, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(wanted),
                    candidates.end(), [](const Candidate& a, const Candidate& b) {
                      return a.distance < b.distance ||
                             (a.distance == b.distance && a.order < b.order);
                    });

  PatchGroup g;
  g.exemplar_index = index;
  g.members.reserve(wanted + 1);
  g.distances.reserve(wanted + 1);
  g.members.push_back(exemplar);
  g.distances.push_back(0.0);
  for (std::size_t j = 0; j < wanted; ++j) {
    g.members.push_back(candidates[j].origin);
    g.distances.push_back(candidates[j].distance);
  }
  return g;
}

}  // namespace

std::vector<int> exemplar_positions(int extent, int side, int stride) {
  std::vector<int> out;
  const int last = extent - side;
  if (last < 0) return out;
  for (int p = 0; p <= last; p += stride) out.push_back(p);
  if (out.back() != last) out.push_back(last);
  return out;
}

GroupPlan extract_groups(const Image& img, const GroupingParams& params, int threads) {
  if (params.patch_side < 1 || params.patch_side > std::min(img.width(), img.height())) {
    throw ConfigError("patch side " + std::to_string(params.patch_side) +
                      " does not fit in the image");
  }
  if (params.search_window < params.patch_side) {
    throw ConfigError("search window must be at least the patch side");
  }
  if (params.group_size < 1) throw ConfigError("group size must be >= 1");
  if (params.patch_stride < 1 || params.patch_stride > params.patch_side) {
    throw ConfigError("patch stride must lie in [1, patch side] so every pixel is covered");
  }

  const auto rows = exemplar_positions(img.height(), params.patch_side, params.patch_stride);
  const auto cols = exemplar_positions(img.width(), params.patch_side, params.patch_stride);

  GroupPlan plan;
  plan.width = img.width();
  plan.height = img.height();
  plan.patch_side = params.patch_side;
  plan.requested_group_size = params.group_size;
  plan.groups.resize(rows.size() * cols.size());

  parallel_for(plan.groups.size(), threads, [&](std::size_t i) {
    const PatchOrigin exemplar{rows[i / cols.size()], cols[i % cols.size()]};
    plan.groups[i] = match_exemplar(img, params, i, exemplar);
  });

  plan.group_size_shrunk = std::any_of(plan.groups.begin(), plan.groups.end(), [&](const auto& g) {
    return g.members.size() < static_cast<std::size_t>(params.group_size);
  });
  return plan;
}

GroupPlan extract_groups(const Image& img, const SolverConfig& cfg, int threads) {
  return extract_groups(img, GroupingParams::from(cfg), threads);
}

Matrix group_matrix(const Image& img, const PatchGroup& group, int patch_side) {
  Matrix x(patch_side * patch_side, static_cast<Eigen::Index>(group.members.size()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const PatchOrigin o = group.members[static_cast<std::size_t>(j)];
    for (int r = 0; r < patch_side; ++r) {
      for (int c = 0; c < patch_side; ++c) x(r * patch_side + c, j) = img(o.row + r, o.col + c);
    }
  }
  return x;
}

std::vector<Matrix> group_matrices(const Image& img, const GroupPlan& plan) {
  std::vector<Matrix> out;
  out.reserve(plan.groups.size());
  for (const auto& g : plan.groups) out.push_back(group_matrix(img, g, plan.patch_side));
  return out;
}

Image aggregate(const GroupPlan& plan, std::span<const Matrix> processed) {
  if (processed.size() != plan.groups.size()) {
    throw AggregationError("expected " + std::to_string(plan.groups.size()) +
                           " processed groups, got " + std::to_string(processed.size()));
  }
  const int side = plan.patch_side;
  Image sum(plan.width, plan.height);
  // Neumaier-compensated sums.
  std::vector<double> carry(sum.size(), 0.0);
  std::vector<double> count(sum.size(), 0.0);

  for (std::size_t i = 0; i < processed.size(); ++i) {
    const PatchGroup& g = plan.groups[i];
    const Matrix& x = processed[i];
    if (x.rows() != side * side || x.cols() != static_cast<Eigen::Index>(g.members.size())) {
      throw AggregationError("processed group " + std::to_string(i) + " has shape " +
                             std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const PatchOrigin o = g.members[static_cast<std::size_t>(j)];
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const auto k = static_cast<std::size_t>(o.row + r) * plan.width + o.col + c;
          double& acc = sum(o.row + r, o.col + c);
          const double v = x(r * side + c, j);
          const double t = acc + v;
          carry[k] += std::abs(acc) >= std::abs(v) ? (acc - t) + v : (v - t) + acc;
          acc = t;
          count[k] += 1.0;
        }
      }
    }
  }

  auto px = sum.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (count[i] == 0.0) throw AggregationError("pixel not covered by any group");
    px[i] = (px[i] + carry[i]) / count[i];
  }
  return sum;
}

}  // namespace nlcs
