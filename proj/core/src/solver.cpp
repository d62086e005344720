#include "nlcs/solver.hpp"

#include <charconv>
#include <ostream>
#include <string>

#include "nlcs/error.hpp"
#include "nlcs/metrics.hpp"
#include "nlcs/parallel.hpp"
#include "nlcs/regularizers.hpp"

namespace nlcs {

namespace {

const SolverConfig& validated(const SolverConfig& cfg, const MeasurementSet& ms,
                              const BlockMeasurementOperator& op, const SolverOptions& options) {
  cfg.validate();
  check_compatible(ms, op);
  if (cfg.regularizer == Regularizer::hsse && options.gmm == nullptr) {
    throw ConfigError("the hsse regularizer needs an external GMM (--gmm)");
  }
  if (cfg.patch_side > std::min(ms.width, ms.height)) {
    throw ConfigError("patch_side exceeds the image size");
  }
  return cfg;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

double data_fidelity(const MeasurementSet& ms, const BlockMeasurementOperator& op, const Image& x) {
  check_compatible(ms, op);
  if (x.width() != ms.width || x.height() != ms.height) {
    throw DimensionError("estimate dimensions do not match measurements");
  }
  double total = 0.0;
  for (int k = 0; k < ms.block_count(); ++k) {
    total += 0.5 * (ms.values.col(k) - op.phi() * block_vector(x, ms.block_size, k)).squaredNorm();
  }
  return total;
}

ObjectiveReport objective_report(const SolverState& state, const MeasurementSet& ms,
                                 const BlockMeasurementOperator& op) {
  return {data_fidelity(ms, op, state.x_hat), state.reg_surrogate};
}

Image initialize(const MeasurementSet& ms, const BlockMeasurementOperator& op) {
  return minimum_norm_solution(ms, op);
}

Solver::Solver(const MeasurementSet& ms, const BlockMeasurementOperator& op,
               const SolverConfig& cfg, SolverOptions options)
    : ms_(ms),
      op_(op),
      cfg_(validated(cfg, ms, op, options)),
      options_(std::move(options)),
      update_(op, cfg.eta) {
  if (options_.threads <= 0) options_.threads = default_thread_count();
  state_.x_hat = initialize(ms_, op_);
}

const TraceRow& Solver::step() {
  const int iter = ++state_.iteration;
  if ((iter - 1) % cfg_.match_every == 0) {
    plan_ = extract_groups(state_.x_hat, cfg_, options_.threads);
  }

  GroupContext ctx = GroupContext::from(cfg_, options_.gmm);
  ctx.lambda *= lambda_scale_;

  std::vector<Matrix> processed(plan_.groups.size());
  std::vector<double> penalties(plan_.groups.size(), 0.0);
  parallel_for(plan_.groups.size(), options_.threads, [&](std::size_t i) {
    GroupEstimate est = apply_regularizer(
        cfg_.regularizer, group_matrix(state_.x_hat, plan_.groups[i], plan_.patch_side), ctx);
    processed[i] = std::move(est.value);
    penalties[i] = est.penalty;
  });

  const Image z = aggregate(plan_, processed);
  Image next = update_.apply(z, ms_);
  if (!next.all_finite()) throw DivergenceError(iter);

  const double prev_norm = state_.x_hat.as_vector().norm();
  last_change_ = (next.as_vector() - state_.x_hat.as_vector()).norm() / std::max(prev_norm, 1e-300);
  state_.x_hat = std::move(next);

  double reg = 0.0;
  for (double p : penalties) reg += p;
  state_.reg_surrogate = reg;

  TraceRow row{iter, data_fidelity(ms_, op_, state_.x_hat), reg, std::nullopt};
  if (options_.ground_truth != nullptr) row.psnr = psnr(state_.x_hat, *options_.ground_truth).db;
  state_.trace.push_back(row);

  lambda_scale_ *= cfg_.lambda_decay;
  if (options_.on_iteration) options_.on_iteration(state_.trace.back());
  return state_.trace.back();
}

void Solver::run() {
  while (state_.iteration < cfg_.outer_iters) {
    step();
    if (cfg_.rel_tol > 0.0 && last_change_ < cfg_.rel_tol) break;
  }
}

Reconstruction reconstruct(const MeasurementSet& ms, const BlockMeasurementOperator& op,
                           const SolverConfig& cfg, SolverOptions options) {
  Solver solver(ms, op, cfg, std::move(options));
  solver.run();
  return {solver.state().x_hat, solver.state().trace};
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,data_fidelity,reg_surrogate,psnr\n";
  for (const auto& row : trace) {
    out << row.iter << ',' << format_double(row.data_fidelity) << ','
        << format_double(row.reg_surrogate) << ',';
    if (row.psnr) out << format_double(*row.psnr);
    out << '\n';
  }
}

}  // namespace nlcs
