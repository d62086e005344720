#include "nlcs/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlcs/error.hpp"
#include "nlcs/shrinkage.hpp"

namespace nlcs {

GroupContext GroupContext::from(const SolverConfig& cfg, const ExternalGMM* gmm) {
  GroupContext ctx;
  ctx.mu = cfg.mu;
  ctx.lambda = cfg.lambda;
  ctx.rho = cfg.rho;
  ctx.tau = cfg.tau;
  ctx.h = cfg.h;
  ctx.k_wnnm = cfg.k_wnnm;
  ctx.eps_wnnm = cfg.eps_wnnm;
  ctx.rounds = cfg.resolved_inner_iters();
  ctx.trunc_rank = cfg.trunc_rank;
  ctx.gmm = gmm;
  return ctx;
}

namespace {

// Minimizer of 1/(2mu)||A - P||^2 + 1/(2rho)||A - Q||^2 + lambda||A||_1.
Matrix coupled_l1_step(const Matrix& p, const Matrix& q, const GroupContext& ctx) {
  const double sum = ctx.mu + ctx.rho;
  return soft_threshold(Matrix((ctx.rho * p + ctx.mu * q) / sum), ctx.lambda * ctx.mu * ctx.rho / sum);
}

double l1(const Matrix& a) { return a.cwiseAbs().sum(); }

}  // namespace

// --- gsr --------------------------------------------------------------------

GroupEstimate prox_gsr(const Matrix& x, const GroupContext& ctx) {
  const double t = std::sqrt(2.0 * ctx.lambda * ctx.mu);
  if (t == 0.0) return {x, 0.0};
  const RankOneDictionary dict = rank_one_dictionary(x);
  const Vector kept = hard_threshold(dict.codes(), t);
  const auto nonzero = static_cast<double>((kept.array() != 0.0).count());
  return {dict.reconstruct(kept), ctx.lambda * nonzero};
}

// --- gsrc -------------------------------------------------------------------

GsrcModel fit_gsrc(const Matrix& x, const GroupContext& ctx) {
  GsrcModel model{pca_dictionary(x), {}};
  model.beta = model.dict.codes(x) * nlm_weights(x, ctx.h);
  return model;
}

GroupEstimate apply_gsrc(const Matrix& x, const GsrcModel& model, const GroupContext& ctx) {
  const Matrix codes = model.dict.codes(x);
  const Matrix reference = model.beta.replicate(1, codes.cols());
  const Matrix residual = soft_threshold(Matrix(codes - reference), ctx.lambda * ctx.mu);
  return {model.dict.reconstruct(reference + residual), ctx.lambda * l1(residual)};
}

GroupEstimate prox_gsrc(const Matrix& x, const GroupContext& ctx) {
  if (ctx.lambda * ctx.mu == 0.0) return {x, 0.0};
  return apply_gsrc(x, fit_gsrc(x, ctx), ctx);
}

// --- hsse -------------------------------------------------------------------

HsseModel fit_hsse(const Matrix& x, const GroupContext& ctx) {
  if (ctx.gmm == nullptr) {
    throw ConfigError("the hsse regularizer needs an external GMM (train one with train-gmm)");
  }
  if (ctx.gmm->dim() != x.rows()) {
    throw ConfigError("external GMM patch dimension " + std::to_string(ctx.gmm->dim()) +
                      " does not match group patch dimension " + std::to_string(x.rows()));
  }
  HsseModel model{pca_dictionary(x), {}, 0};
  const SubdictionaryChoice choice =
      select_subdictionary(*ctx.gmm, (x.colwise() - model.dict.mean).eval());
  model.external = *choice.basis;
  model.component = choice.component;
  return model;
}

GroupEstimate apply_hsse(const Matrix& x, const HsseModel& model, const GroupContext& ctx) {
  const Matrix& d = model.dict.basis;
  const Matrix& u = model.external;
  const Matrix centered = x.colwise() - model.dict.mean;
  const Matrix internal = d.transpose() * centered;
  const double ext_t = ctx.tau * ctx.rho;

  Matrix ext_codes = soft_threshold(Matrix(u.transpose() * centered), ext_t);
  Matrix codes = internal;
  for (int round = 0; round < std::max(ctx.rounds, 1); ++round) {
    codes = coupled_l1_step(internal, d.transpose() * (u * ext_codes), ctx);
    ext_codes = soft_threshold(Matrix(u.transpose() * (d * codes)), ext_t);
  }
  return {model.dict.reconstruct(codes), ctx.lambda * l1(codes) + ctx.tau * l1(ext_codes)};
}

GroupEstimate prox_hsse(const Matrix& x, const GroupContext& ctx) {
  return apply_hsse(x, fit_hsse(x, ctx), ctx);
}

// --- nlr --------------------------------------------------------------------

NlrModel fit_nlr(const Matrix& x, const GroupContext& ctx) {
  return {wnnm_weights(singular_values(x), ctx.k_wnnm * ctx.lambda * ctx.mu, ctx.eps_wnnm)};
}

GroupEstimate apply_nlr(const Matrix& x, const NlrModel& model, const GroupContext&) {
  const SpectralDecomposition svd = decompose(x);
  const Vector shrunk = (svd.sigma - model.weights).cwiseMax(0.0);
  return {wnnm_shrink(svd, model.weights), model.weights.dot(shrunk)};
}

GroupEstimate prox_nlr(const Matrix& x, const GroupContext& ctx) {
  const double k = ctx.k_wnnm * ctx.lambda * ctx.mu;
  if (k == 0.0) return {x, 0.0};
  const SpectralDecomposition svd = decompose(x);
  // Weights start from the spectrum of X and are refreshed from the shrunk
  // spectrum on every further round.
  Vector weights = wnnm_weights(svd.sigma, k, ctx.eps_wnnm);
  Vector shrunk = (svd.sigma - weights).cwiseMax(0.0);
  for (int round = 1; round < ctx.rounds; ++round) {
    weights = wnnm_weights(shrunk, k, ctx.eps_wnnm);
    shrunk = (svd.sigma - weights).cwiseMax(0.0);
  }
  return {wnnm_shrink(svd, weights), weights.dot(shrunk)};
}

// --- rrc --------------------------------------------------------------------

Matrix rrc_reference(const Matrix& x, double h) {
  const Vector w = nlm_weights(x, h);
  const Eigen::Index m = x.cols();
  Matrix out(x.rows(), m);
  Vector acc = Vector::Zero(x.rows());
  double mass = 0.0;
  // Column j (0-based) averages the first m - j columns, so walk the prefix
  // sums upward and fill from the right.
  for (Eigen::Index k = 0; k < m; ++k) {
    acc += w(k) * x.col(k);
    mass += w(k);
    out.col(m - 1 - k) = acc / mass;
  }
  return out;
}

RrcModel fit_rrc(const Matrix& x, const GroupContext& ctx) {
  return {singular_values(rrc_reference(x, ctx.h))};
}

GroupEstimate apply_rrc(const Matrix& x, const RrcModel& model, const GroupContext& ctx) {
  const SpectralDecomposition svd = decompose(x);
  const Vector s = rank_residual_values(svd.sigma, model.psi, ctx.lambda * ctx.mu);
  return {svd.compose(s), ctx.lambda * (s - model.psi).cwiseAbs().sum()};
}

GroupEstimate prox_rrc(const Matrix& x, const GroupContext& ctx) {
  if (ctx.lambda * ctx.mu == 0.0) return {x, 0.0};
  return apply_rrc(x, fit_rrc(x, ctx), ctx);
}

// --- lrgsc ------------------------------------------------------------------

LrgscModel fit_lrgsc(const Matrix& x, const GroupContext&) { return {pca_dictionary(x)}; }

LrgscCodes lrgsc_codes(const Matrix& x, const LrgscModel& model, const GroupContext& ctx) {
  const Matrix internal = model.dict.codes(x);
  // B starts at the plain l1 group-sparse codes.
  LrgscCodes c{internal, soft_threshold(internal, ctx.lambda * ctx.mu)};
  for (int round = 0; round < std::max(ctx.rounds, 1); ++round) {
    c.sparse = coupled_l1_step(internal, c.low_rank, ctx);
    c.low_rank = svt(c.sparse, ctx.tau * ctx.rho);
  }
  return c;
}

GroupEstimate apply_lrgsc(const Matrix& x, const LrgscModel& model, const GroupContext& ctx) {
  const LrgscCodes c = lrgsc_codes(x, model, ctx);
  const double penalty =
      ctx.lambda * l1(c.sparse) + (ctx.tau > 0.0 ? ctx.tau * nuclear_norm(c.low_rank) : 0.0);
  return {model.dict.reconstruct(c.sparse), penalty};
}

GroupEstimate prox_lrgsc(const Matrix& x, const GroupContext& ctx) {
  if (ctx.lambda == 0.0 && ctx.tau == 0.0) return {x, 0.0};
  return apply_lrgsc(x, fit_lrgsc(x, ctx), ctx);
}

// --- trunc ------------------------------------------------------------------

GroupEstimate prox_trunc(const Matrix& x, const GroupContext& ctx) {
  const Eigen::Index c = std::min(x.rows(), x.cols());
  const Eigen::Index r = std::min<Eigen::Index>(ctx.trunc_rank, c);
  return {truncate_rank(x, r), static_cast<double>(r)};
}

GroupEstimate apply_regularizer(Regularizer reg, const Matrix& x, const GroupContext& ctx) {
  switch (reg) {
    case Regularizer::gsr:
      return prox_gsr(x, ctx);
    case Regularizer::gsrc:
      return prox_gsrc(x, ctx);
    case Regularizer::hsse:
      return prox_hsse(x, ctx);
    case Regularizer::nlr:
      return prox_nlr(x, ctx);
    case Regularizer::rrc:
      return prox_rrc(x, ctx);
    case Regularizer::lrgsc:
      return prox_lrgsc(x, ctx);
    case Regularizer::trunc:
      return prox_trunc(x, ctx);
  }
  throw ConfigError("unknown regularizer");
}

}  // namespace nlcs
