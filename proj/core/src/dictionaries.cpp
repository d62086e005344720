#include "nlcs/dictionaries.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "nlcs/binary_io.hpp"
#include "nlcs/error.hpp"
#include "nlcs/grouping.hpp"

namespace nlcs {

Matrix PcaDictionary::codes(const Matrix& x) const {
  return basis.transpose() * (x.colwise() - mean);
}

Matrix PcaDictionary::reconstruct(const Matrix& codes) const {
  return (basis * codes).colwise() + mean;
}

PcaDictionary pca_dictionary(const Matrix& x) {
  if (x.cols() < 1) throw ContractError("pca_dictionary: group has no columns");
  PcaDictionary d;
  d.mean = x.rowwise().mean();
  SpectralDecomposition svd = decompose(x.colwise() - d.mean);
  d.degenerate = svd.sigma.size() == 0 || svd.sigma(0) == 0.0;
  d.basis = std::move(svd.u);
  return d;
}

Matrix RankOneDictionary::atom(Eigen::Index j) const {
  return svd.u.col(j) * svd.v.col(j).transpose();
}

Matrix RankOneDictionary::reconstruct(const Vector& codes) const { return svd.compose(codes); }

RankOneDictionary rank_one_dictionary(const Matrix& x) {
  if (x.cols() < 1) throw ContractError("rank_one_dictionary: group has no columns");
  return {decompose(x)};
}

// ---------------------------------------------------------------------------
// ExternalGMM

ExternalGMM::ExternalGMM(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  log_norm_.reserve(components_.size());
  for (const auto& c : components_) {
    const double b = static_cast<double>(c.mean.size());
    const double log_det = c.eigenvalues.cwiseMax(kCovarianceFloor).array().log().sum();
    log_norm_.push_back(-0.5 * (b * std::log(2.0 * std::numbers::pi) + log_det));
  }
}

int ExternalGMM::dim() const noexcept {
  return components_.empty() ? 0 : static_cast<int>(components_.front().mean.size());
}

double ExternalGMM::log_density(const Vector& x, int k) const {
  const auto& c = component(k);
  const Vector proj = c.basis.transpose() * (x - c.mean);
  const Vector inv = c.eigenvalues.cwiseMax(kCovarianceFloor).cwiseInverse();
  return log_norm_[static_cast<std::size_t>(k)] - 0.5 * proj.cwiseAbs2().dot(inv);
}

double ExternalGMM::group_log_density(const Matrix& group, int k) const {
  const auto& c = component(k);
  if (group.rows() != c.mean.size()) throw DimensionError("group dimension does not match GMM");
  const Matrix proj = c.basis.transpose() * (group.colwise() - c.mean);
  const Vector inv = c.eigenvalues.cwiseMax(kCovarianceFloor).cwiseInverse();
  const double quad = proj.cwiseAbs2().rowwise().sum().dot(inv);
  return static_cast<double>(group.cols()) * log_norm_[static_cast<std::size_t>(k)] - 0.5 * quad;
}

SubdictionaryChoice select_subdictionary(const ExternalGMM& gmm, const Matrix& group) {
  if (gmm.size() == 0) throw ConfigError("external GMM has no components");
  SubdictionaryChoice best{0, &gmm.component(0).basis};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < gmm.size(); ++k) {
    const double score = gmm.group_log_density(group, k) + std::log(gmm.component(k).weight);
    if (score > best_score) {
      best_score = score;
      best = {k, &gmm.component(k).basis};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// EM training

namespace {

struct GroupStats {
  double count = 0.0;
  Vector sum;
  Matrix scatter;  // sum of x x^T
};

GroupStats group_stats(const Matrix& g) {
  return {static_cast<double>(g.cols()), g.rowwise().sum(), g * g.transpose()};
}

// Gaussian parameters in the form used by the E-step: precision P, P mu,
// mu^T P mu and the per-column log normalizer.
struct Precomputed {
  Matrix precision;
  Vector precision_mean;
  double mean_quad = 0.0;
  double log_norm = 0.0;
  double log_weight = 0.0;
};

Precomputed precompute(const GaussianComponent& c) {
  const Vector clipped = c.eigenvalues.cwiseMax(ExternalGMM::kCovarianceFloor);
  Precomputed p;
  p.precision = c.basis * clipped.cwiseInverse().asDiagonal() * c.basis.transpose();
  p.precision_mean = p.precision * c.mean;
  p.mean_quad = c.mean.dot(p.precision_mean);
  const double b = static_cast<double>(c.mean.size());
  p.log_norm = -0.5 * (b * std::log(2.0 * std::numbers::pi) + clipped.array().log().sum());
  p.log_weight = std::log(c.weight);
  return p;
}

// Covariance eigen-decomposition, eigenvalues descending and clamped at 0.
void set_covariance(GaussianComponent& c, const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  c.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  c.basis = eig.eigenvectors().rowwise().reverse();
}

std::size_t pick_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n;
}

std::vector<GaussianComponent> initial_components(const std::vector<GroupStats>& stats, int m,
                                                  Rng& rng) {
  const std::size_t groups = stats.size();
  const Eigen::Index b = stats.front().sum.size();

  double total = 0.0;
  Vector mean_all = Vector::Zero(b);
  Matrix scatter_all = Matrix::Zero(b, b);
  for (const auto& s : stats) {
    total += s.count;
    mean_all += s.sum;
    scatter_all += s.scatter;
  }
  mean_all /= total;
  const Matrix cov_all = scatter_all / total - mean_all * mean_all.transpose();

  // k-means++ seeding on group means; uniform when the means coincide.
  std::vector<std::size_t> seeds{pick_index(rng, groups)};
  std::vector<double> d2(groups, std::numeric_limits<double>::infinity());
  while (seeds.size() < static_cast<std::size_t>(m)) {
    const Vector last = stats[seeds.back()].sum / stats[seeds.back()].count;
    double acc = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      d2[g] = std::min(d2[g], (stats[g].sum / stats[g].count - last).squaredNorm());
      acc += d2[g];
    }
    std::size_t next = 0;
    if (acc > 0.0) {
      double target = rng.uniform() * acc;
      for (next = 0; next + 1 < groups; ++next) {
        target -= d2[next];
        if (target <= 0.0) break;
      }
    } else {
      next = pick_index(rng, groups);
    }
    seeds.push_back(next);
  }

  std::vector<GaussianComponent> comps(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const GroupStats& s = stats[seeds[static_cast<std::size_t>(k)]];
    auto& c = comps[static_cast<std::size_t>(k)];
    c.weight = 1.0 / m;
    c.mean = s.sum / s.count;
    const Matrix local = s.scatter / s.count - c.mean * c.mean.transpose();
    set_covariance(c, 0.5 * cov_all + 0.5 * local);
  }
  return comps;
}

}  // namespace

ExternalGMM train_gmm(std::span<const Matrix> groups, const GmmTrainingOptions& options, Rng& rng,
                      GmmTrainingReport* report) {
  if (options.components < 1) throw ConfigError("GMM needs at least one component");
  if (groups.empty()) throw TrainingError("no training groups");
  const Eigen::Index b = groups.front().rows();
  std::size_t columns = 0;
  for (const auto& g : groups) {
    if (g.rows() != b || g.cols() < 1) throw TrainingError("training groups must share one patch size");
    columns += static_cast<std::size_t>(g.cols());
  }
  const int m = options.components;
  if (columns < static_cast<std::size_t>(m) * static_cast<std::size_t>(b)) {
    throw TrainingError("need at least components * patch_area training patches, got " +
                        std::to_string(columns));
  }
  if (groups.size() < static_cast<std::size_t>(m)) {
    throw TrainingError("fewer training groups than mixture components");
  }

  std::vector<GroupStats> stats;
  stats.reserve(groups.size());
  for (const auto& g : groups) stats.push_back(group_stats(g));

  std::vector<GaussianComponent> comps = initial_components(stats, m, rng);
  std::vector<int> reseeds_per_component(static_cast<std::size_t>(m), 0);
  GmmTrainingReport local_report;
  GmmTrainingReport& rep = report ? *report : local_report;
  rep = {};

  const std::size_t n_groups = groups.size();
  Matrix resp(static_cast<Eigen::Index>(n_groups), m);

  // E-step: fills `resp`, returns the total log-likelihood.
  auto e_step = [&]() {
    std::vector<Precomputed> pre;
    pre.reserve(comps.size());
    for (const auto& c : comps) pre.push_back(precompute(c));
    double ll = 0.0;
    Vector scores(m);
    for (std::size_t g = 0; g < n_groups; ++g) {
      const GroupStats& s = stats[g];
      for (int k = 0; k < m; ++k) {
        const Precomputed& p = pre[static_cast<std::size_t>(k)];
        const double quad = (p.precision.array() * s.scatter.array()).sum() -
                            2.0 * p.precision_mean.dot(s.sum) + s.count * p.mean_quad;
        scores(k) = p.log_weight + s.count * p.log_norm - 0.5 * quad;
      }
      const double top = scores.maxCoeff();
      const double lse = top + std::log((scores.array() - top).exp().sum());
      resp.row(static_cast<Eigen::Index>(g)) = (scores.array() - lse).exp().transpose();
      ll += lse;
    }
    return ll;
  };

  rep.log_likelihood.push_back(e_step());
  for (int iter = 0; iter < options.em_iters; ++iter) {
    // M-step
    for (int k = 0; k < m; ++k) {
      double mass = 0.0;
      double count = 0.0;
      Vector sum = Vector::Zero(b);
      Matrix scatter = Matrix::Zero(b, b);
      for (std::size_t g = 0; g < n_groups; ++g) {
        const double r = resp(static_cast<Eigen::Index>(g), k);
        if (r < 1e-300) continue;
        mass += r;
        count += r * stats[g].count;
        sum += r * stats[g].sum;
        scatter += r * stats[g].scatter;
      }
      auto& c = comps[static_cast<std::size_t>(k)];
      if (mass < 1e-10) {
        c.weight = 0.0;
        continue;
      }
      c.weight = mass / static_cast<double>(n_groups);
      c.mean = sum / count;
      set_covariance(c, scatter / count - c.mean * c.mean.transpose());
    }

    // Re-seed empty components by splitting the heaviest one along its
    // principal axis.
    for (int k = 0; k < m; ++k) {
      auto& c = comps[static_cast<std::size_t>(k)];
      if (c.weight > 0.0) continue;
      if (++reseeds_per_component[static_cast<std::size_t>(k)] > options.max_reseeds) {
        throw TrainingError("mixture component " + std::to_string(k) +
                            " stays empty after repeated re-seeding");
      }
      ++rep.reseeds;
      auto heaviest = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& c2) {
        return a.weight < c2.weight;
      });
      const Vector offset =
          0.5 * std::sqrt(std::max(heaviest->eigenvalues(0), ExternalGMM::kCovarianceFloor)) *
          heaviest->basis.col(0);
      heaviest->weight *= 0.5;
      c = *heaviest;
      heaviest->mean -= offset;
      c.mean += offset;
    }

    rep.log_likelihood.push_back(e_step());
  }

  rep.assignments.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    Eigen::Index best = 0;
    resp.row(static_cast<Eigen::Index>(g)).maxCoeff(&best);
    rep.assignments[g] = static_cast<int>(best);
  }
  return ExternalGMM(std::move(comps));
}

std::vector<Matrix> collect_training_groups(std::span<const Image> images, int patch_side,
                                            int group_size, int search_window,
                                            std::size_t max_patches, Rng& rng) {
  std::vector<Matrix> pool;
  for (const Image& img : images) {
    if (img.width() < patch_side || img.height() < patch_side) continue;
    const GroupingParams params{patch_side, group_size, search_window, patch_side};
    const GroupPlan plan = extract_groups(img, params);
    for (const auto& g : plan.groups) {
      Matrix x = group_matrix(img, g, patch_side);
      x = x.colwise() - x.rowwise().mean();
      pool.push_back(std::move(x));
    }
  }
  // Fisher-Yates with our own generator keeps the selection platform independent.
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[pick_index(rng, i)]);
  }
  std::vector<Matrix> out;
  std::size_t columns = 0;
  for (auto& g : pool) {
    if (columns + static_cast<std::size_t>(g.cols()) > max_patches) break;
    columns += static_cast<std::size_t>(g.cols());
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// GMM file

namespace {
constexpr char kGmmMagic[9] = "NLCSGMM1";
}

void write_gmm(std::ostream& out, const ExternalGMM& gmm) {
  out.write(kGmmMagic, 8);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(gmm.size()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(gmm.dim()));
  for (const auto& c : gmm.components()) {
    binary::put<double>(out, c.weight);
    for (Eigen::Index i = 0; i < c.mean.size(); ++i) binary::put<double>(out, c.mean(i));
    for (Eigen::Index i = 0; i < c.eigenvalues.size(); ++i) binary::put<double>(out, c.eigenvalues(i));
    for (Eigen::Index r = 0; r < c.basis.rows(); ++r) {
      for (Eigen::Index col = 0; col < c.basis.cols(); ++col) binary::put<double>(out, c.basis(r, col));
    }
  }
  if (!out) throw IoError("failed writing GMM model");
}

ExternalGMM read_gmm(std::istream& in) {
  std::size_t offset = 0;
  binary::expect_magic(in, offset, kGmmMagic);
  const auto count_at = offset;
  const auto m = binary::get<std::uint32_t>(in, offset, "component count");
  const auto b = binary::get<std::uint32_t>(in, offset, "patch dimension");
  if (m == 0 || m > 1u << 16) throw ParseError("invalid component count", count_at);
  if (b == 0 || b > 1u << 14) throw ParseError("invalid patch dimension", count_at + 4);
  std::vector<GaussianComponent> comps(m);
  for (auto& c : comps) {
    const auto weight_at = offset;
    c.weight = binary::get<double>(in, offset, "weight");
    if (!(c.weight > 0.0)) throw ParseError("component weight must be positive", weight_at);
    c.mean.resize(b);
    c.eigenvalues.resize(b);
    c.basis.resize(b, b);
    for (std::uint32_t i = 0; i < b; ++i) c.mean(i) = binary::get<double>(in, offset, "mean");
    for (std::uint32_t i = 0; i < b; ++i) c.eigenvalues(i) = binary::get<double>(in, offset, "eigenvalues");
    for (std::uint32_t r = 0; r < b; ++r) {
      for (std::uint32_t col = 0; col < b; ++col) c.basis(r, col) = binary::get<double>(in, offset, "basis");
    }
  }
  return ExternalGMM(std::move(comps));
}

void write_gmm(const std::filesystem::path& path, const ExternalGMM& gmm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_gmm(out, gmm);
}

ExternalGMM read_gmm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_gmm(in);
}

}  // namespace nlcs
