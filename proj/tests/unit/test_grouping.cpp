#include <gtest/gtest.h>

#include <random>

#include "nlcs/error.hpp"
#include "nlcs/grouping.hpp"
#include "oracles.hpp"

using namespace nlcs;

namespace {

GroupingParams params(int side, int m, int window, int stride) { return {side, m, window, stride}; }

}  // namespace

TEST(ExemplarGrid, CoversLastOrigin) {
  EXPECT_EQ(exemplar_positions(16, 4, 4), (std::vector<int>{0, 4, 8, 12}));
  EXPECT_EQ(exemplar_positions(17, 4, 4), (std::vector<int>{0, 4, 8, 12, 13}));
  EXPECT_EQ(exemplar_positions(4, 4, 3), (std::vector<int>{0}));
}

TEST(ExtractGroups, ConstantImageTieBreak) {
  const GroupPlan plan = extract_groups(Image(16, 16, 7.0), params(4, 4, 8, 4));
  // Exemplar (4,4): window rows/cols 2..6 after centering, so the raster-earliest
  // candidates are (2,2), (2,3), (2,4).
  const PatchGroup* g = nullptr;
  for (const auto& grp : plan.groups)
    if (grp.members[0] == PatchOrigin{4, 4}) g = &grp;
  ASSERT_NE(g, nullptr);
  ASSERT_EQ(g->members.size(), 4u);
  EXPECT_EQ(g->members[1], (PatchOrigin{2, 2}));
  EXPECT_EQ(g->members[2], (PatchOrigin{2, 3}));
  EXPECT_EQ(g->members[3], (PatchOrigin{2, 4}));
  for (double d : g->distances) EXPECT_EQ(d, 0.0);
}

TEST(ExtractGroups, ExactDuplicateWins) {
  std::mt19937_64 gen(1);
  Image img = oracle::random_image(gen, 20, 20);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) img(12 + r, 12 + c) = img(8 + r, 8 + c);
  const GroupPlan plan = extract_groups(img, params(4, 2, 12, 4));
  for (const auto& g : plan.groups) {
    if (g.members[0] == PatchOrigin{8, 8}) {
      ASSERT_EQ(g.members.size(), 2u);
      EXPECT_EQ(g.members[1], (PatchOrigin{12, 12}));
      EXPECT_EQ(g.distances[1], 0.0);
      return;
    }
  }
  FAIL() << "exemplar (8,8) not on the grid";
}

TEST(ExtractGroups, MatchesExhaustiveSearch) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = oracle::random_image(gen, 16, 16);
    const GroupPlan plan = extract_groups(img, params(4, 6, 12, 3));
    for (const auto& g : plan.groups) {
      const auto expected = oracle::brute_knn(img, g.members[0].row, g.members[0].col, 4, 12, 6);
      ASSERT_EQ(g.members.size(), expected.size());
      for (std::size_t j = 0; j < expected.size(); ++j) {
        EXPECT_EQ(g.members[j].row, expected[j].first);
        EXPECT_EQ(g.members[j].col, expected[j].second);
      }
    }
  }
}

TEST(ExtractGroups, MatchesExhaustiveSearch32) {
  std::mt19937_64 gen(3);
  const Image img = oracle::random_image(gen, 32, 24);
  const GroupPlan plan = extract_groups(img, params(5, 9, 15, 4), 3);
  for (const auto& g : plan.groups) {
    const auto expected = oracle::brute_knn(img, g.members[0].row, g.members[0].col, 5, 15, 9);
    ASSERT_EQ(g.members.size(), expected.size());
    for (std::size_t j = 0; j < expected.size(); ++j)
      EXPECT_EQ(g.members[j], (PatchOrigin{expected[j].first, expected[j].second}));
  }
}

TEST(ExtractGroups, DistancesSortedAndConsistent) {
  std::mt19937_64 gen(4);
  const Image img = oracle::random_image(gen, 24, 24);
  const GroupPlan plan = extract_groups(img, params(4, 10, 16, 2));
  for (const auto& g : plan.groups) {
    EXPECT_EQ(g.distances[0], 0.0);
    const Matrix x = group_matrix(img, g, 4);
    for (std::size_t j = 0; j < g.members.size(); ++j) {
      const double d = (x.col(static_cast<Eigen::Index>(j)) - x.col(0)).squaredNorm();
      EXPECT_NEAR(d, g.distances[j], 1e-9);
      if (j > 0) EXPECT_LE(g.distances[j - 1], g.distances[j]);
    }
  }
}

TEST(ExtractGroups, ShrinksGroupWhenWindowIsSmall) {
  std::mt19937_64 gen(5);
  const GroupPlan plan = extract_groups(oracle::random_image(gen, 6, 6), params(4, 60, 40, 1));
  EXPECT_TRUE(plan.group_size_shrunk);
  for (const auto& g : plan.groups) EXPECT_EQ(g.members.size(), 9u);
}

TEST(ExtractGroups, Preconditions) {
  EXPECT_THROW(extract_groups(Image(8, 8), params(10, 4, 12, 2)), ConfigError);
  EXPECT_THROW(extract_groups(Image(8, 8), params(4, 4, 3, 2)), ConfigError);
  EXPECT_THROW(extract_groups(Image(8, 8), params(3, 4, 6, 4)), ConfigError);
}

TEST(ExtractGroups, ThreadCountInvariant) {
  std::mt19937_64 gen(6);
  const Image img = oracle::random_image(gen, 40, 32);
  const GroupPlan a = extract_groups(img, params(6, 12, 20, 3), 1);
  const GroupPlan b = extract_groups(img, params(6, 12, 20, 3), 4);
  ASSERT_EQ(a.groups.size(), b.groups.size());
  for (std::size_t i = 0; i < a.groups.size(); ++i) EXPECT_EQ(a.groups[i].members, b.groups[i].members);
}

TEST(Aggregate, IdentityOnUnmodifiedGroups) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<int> side(2, 6), extra(0, 10), dim(10, 30), m(1, 12);
    const int s = side(gen);
    std::uniform_int_distribution<int> stride(1, s);
    const Image img = oracle::random_image(gen, dim(gen), dim(gen), false);
    const GroupPlan plan = extract_groups(img, params(s, m(gen), s + extra(gen), stride(gen)));
    const auto mats = group_matrices(img, plan);
    const Image back = aggregate(plan, mats);
    EXPECT_LE((back.as_vector() - img.as_vector()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Aggregate, ConstantsAverageToConstant) {
  std::mt19937_64 gen(8);
  const Image img = oracle::random_image(gen, 20, 20);
  const GroupPlan plan = extract_groups(img, params(4, 5, 10, 3));
  auto mats = group_matrices(img, plan);
  for (auto& m : mats) m.setConstant(42.0);
  const Image out = aggregate(plan, mats);
  for (double p : out.pixels()) EXPECT_NEAR(p, 42.0, 1e-12);
}

TEST(Aggregate, OverlapAverages) {
  GroupPlan plan;
  plan.width = 3;
  plan.height = 2;
  plan.patch_side = 2;
  plan.requested_group_size = 1;
  plan.groups.push_back({0, {{0, 0}}, {0.0}});
  plan.groups.push_back({1, {{0, 1}}, {0.0}});
  std::vector<Matrix> mats{Matrix::Constant(4, 1, 0.0), Matrix::Constant(4, 1, 10.0)};
  const Image out = aggregate(plan, mats);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 5.0);
  EXPECT_EQ(out(1, 1), 5.0);
  EXPECT_EQ(out(1, 2), 10.0);
}

TEST(Aggregate, Errors) {
  GroupPlan plan;
  plan.width = 3;
  plan.height = 2;
  plan.patch_side = 2;
  plan.groups.push_back({0, {{0, 0}}, {0.0}});
  std::vector<Matrix> wrong_shape{Matrix::Zero(3, 1)};
  EXPECT_THROW(aggregate(plan, wrong_shape), AggregationError);
  std::vector<Matrix> wrong_count;
  EXPECT_THROW(aggregate(plan, wrong_count), AggregationError);
  std::vector<Matrix> uncovered{Matrix::Zero(4, 1)};
  EXPECT_THROW(aggregate(plan, uncovered), AggregationError);
}
