#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace nlcs {

enum class Regularizer { gsr, gsrc, hsse, nlr, rrc, lrgsc, trunc };

std::string_view to_string(Regularizer r) noexcept;
/// Throws ConfigError on an unknown name.
Regularizer parse_regularizer(std::string_view name);

/// Every knob of the outer loop and of the group models.
///
/// Intensities are on the 8-bit scale, so thresholds (lambda, tau, h, ...) are
/// in gray levels. `defaults_for` returns the tuned per-model defaults.
struct SolverConfig {
  // sampling
  int block_size = 32;
  double sampling_rate = 0.1;
  bool ortho = false;
  double noise_sigma = 0.0;

  // grouping
  int patch_side = 8;
  int group_size = 60;
  int search_window = 40;
  int patch_stride = 4;
  int match_every = 1;

  // outer loop
  int outer_iters = 60;
  /// Alternation / reweighting rounds inside a group model; 0 picks the model default.
  int inner_iters = 0;
  double eta = 0.5;
  double lambda_decay = 1.0;
  double rel_tol = 0.0;

  // group model weights
  double mu = 1.0;
  double lambda = 1.0;
  double rho = 1.0;
  double tau = 0.0;
  double h = 1.0;
  double k_wnnm = 2.8;
  double eps_wnnm = 1e-8;
  int trunc_rank = 8;
  Regularizer regularizer = Regularizer::gsrc;

  // external GMM training
  int gmm_components = 32;
  int em_iters = 30;

  std::uint64_t seed = 0;

  static SolverConfig defaults_for(Regularizer r);

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  int patch_area() const noexcept { return patch_side * patch_side; }
  int resolved_inner_iters() const noexcept;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// `key = value` lines, `#` comments, every field in declaration order.
std::string to_text(const SolverConfig& cfg);

using ConfigOverrides = std::map<std::string, std::string, std::less<>>;

/// Parse the text form into raw key/value pairs; unknown keys are rejected.
ConfigOverrides parse_config_entries(std::string_view text);

/// Resolve a full config: start from the defaults of the effective regularizer
/// (explicit `reg` wins over the file's `regularizer` key), then apply entries.
SolverConfig resolve_config(const ConfigOverrides& entries,
                            std::optional<Regularizer> reg = std::nullopt);

/// Parse and validate.
SolverConfig parse_config(std::string_view text);
SolverConfig load_config(const std::filesystem::path& path,
                         std::optional<Regularizer> reg = std::nullopt);
void save_config(const SolverConfig& cfg, const std::filesystem::path& path);

}  // namespace nlcs
