#pragma once

#include "nlcs/config.hpp"
#include "nlcs/dictionaries.hpp"
#include "nlcs/spectral.hpp"

namespace nlcs {

/// Per-group model parameters, taken from SolverConfig.
struct GroupContext {
  double mu = 1.0;
  double lambda = 0.0;
  double rho = 1.0;
  double tau = 0.0;
  double h = 1.0;
  double k_wnnm = 0.0;
  double eps_wnnm = 1e-8;
  /// Alternation (hsse, lrgsc) or reweighting (nlr) rounds.
  int rounds = 1;
  int trunc_rank = 0;
  const ExternalGMM* gmm = nullptr;

  static GroupContext from(const SolverConfig& cfg, const ExternalGMM* gmm = nullptr);
};

/// A processed group together with the model's penalty value at that output
/// (l0 count, l1 sum, weighted nuclear sum, ...), used for objective reporting.
struct GroupEstimate {
  Matrix value;
  double penalty = 0.0;
};

// Each prox below learns its adaptive parts (dictionary, reference codes,
// weights, spectra) from X and then applies the model with those parts frozen.
// The fit_/apply_ pairs expose that split.

/// l0 on rank-one-atom codes: hard threshold of the spectrum at sqrt(2 lambda mu).
GroupEstimate prox_gsr(const Matrix& x, const GroupContext& ctx);

struct GsrcModel {
  PcaDictionary dict;
  Vector beta;  // NLM-weighted average code, replicated to form B
};
GsrcModel fit_gsrc(const Matrix& x, const GroupContext& ctx);
GroupEstimate apply_gsrc(const Matrix& x, const GsrcModel& model, const GroupContext& ctx);
GroupEstimate prox_gsrc(const Matrix& x, const GroupContext& ctx);

struct HsseModel {
  PcaDictionary dict;
  Matrix external;  // U, b x b
  int component = 0;
};
/// ConfigError when ctx.gmm is null.
HsseModel fit_hsse(const Matrix& x, const GroupContext& ctx);
GroupEstimate apply_hsse(const Matrix& x, const HsseModel& model, const GroupContext& ctx);
GroupEstimate prox_hsse(const Matrix& x, const GroupContext& ctx);

struct NlrModel {
  Vector weights;
};
NlrModel fit_nlr(const Matrix& x, const GroupContext& ctx);
GroupEstimate apply_nlr(const Matrix& x, const NlrModel& model, const GroupContext& ctx);
GroupEstimate prox_nlr(const Matrix& x, const GroupContext& ctx);

struct RrcModel {
  Vector psi;
};
/// Reference columns x'_j = sum_{k <= m-j+1} w_k x_k with the NLM weights
/// renormalized over the first m-j+1 columns.
Matrix rrc_reference(const Matrix& x, double h);
RrcModel fit_rrc(const Matrix& x, const GroupContext& ctx);
GroupEstimate apply_rrc(const Matrix& x, const RrcModel& model, const GroupContext& ctx);
GroupEstimate prox_rrc(const Matrix& x, const GroupContext& ctx);

struct LrgscModel {
  PcaDictionary dict;
};
struct LrgscCodes {
  Matrix sparse;    // A
  Matrix low_rank;  // B
};
LrgscModel fit_lrgsc(const Matrix& x, const GroupContext& ctx);
LrgscCodes lrgsc_codes(const Matrix& x, const LrgscModel& model, const GroupContext& ctx);
GroupEstimate apply_lrgsc(const Matrix& x, const LrgscModel& model, const GroupContext& ctx);
GroupEstimate prox_lrgsc(const Matrix& x, const GroupContext& ctx);

/// Keep the top ctx.trunc_rank singular triplets.
GroupEstimate prox_trunc(const Matrix& x, const GroupContext& ctx);

GroupEstimate apply_regularizer(Regularizer reg, const Matrix& x, const GroupContext& ctx);

}  // namespace nlcs
