#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nlcs/config.hpp"
#include "nlcs/dictionaries.hpp"
#include "nlcs/grouping.hpp"
#include "nlcs/image.hpp"
#include "nlcs/sampling.hpp"

namespace nlcs {

struct TraceRow {
  int iter = 0;
  double data_fidelity = 0.0;
  double reg_surrogate = 0.0;
  std::optional<double> psnr;
};

struct SolverState {
  int iteration = 0;
  Image x_hat;
  /// Sum of group penalties from the most recent group step.
  double reg_surrogate = 0.0;
  std::vector<TraceRow> trace;
};

struct ObjectiveReport {
  double data_fidelity = 0.0;
  double reg_surrogate = 0.0;
};

/// 1/2 ||y - phi x||^2 summed over blocks.
double data_fidelity(const MeasurementSet& ms, const BlockMeasurementOperator& op, const Image& x);

ObjectiveReport objective_report(const SolverState& state, const MeasurementSet& ms,
                                 const BlockMeasurementOperator& op);

/// Per-block minimum-norm least squares starting point.
Image initialize(const MeasurementSet& ms, const BlockMeasurementOperator& op);

struct SolverOptions {
  const ExternalGMM* gmm = nullptr;
  const Image* ground_truth = nullptr;
  /// 0 picks default_thread_count().
  int threads = 0;
  std::function<void(const TraceRow&)> on_iteration;
};

/// Outer loop: block matching on the current estimate, group prox, aggregation,
/// then the per-block least-squares update against the measurements.
class Solver {
 public:
  Solver(const MeasurementSet& ms, const BlockMeasurementOperator& op, const SolverConfig& cfg,
         SolverOptions options = {});

  /// One outer iteration. Throws DivergenceError on a non-finite estimate.
  const TraceRow& step();
  /// Iterate until outer_iters, or until the relative change drops below rel_tol.
  void run();

  const SolverState& state() const noexcept { return state_; }
  const SolverConfig& config() const noexcept { return cfg_; }

 private:
  const MeasurementSet& ms_;
  const BlockMeasurementOperator& op_;
  SolverConfig cfg_;
  SolverOptions options_;
  BlockDataUpdate update_;
  SolverState state_;
  GroupPlan plan_;
  double lambda_scale_ = 1.0;
  double last_change_ = 0.0;
};

struct Reconstruction {
  Image image;
  std::vector<TraceRow> trace;
};

Reconstruction reconstruct(const MeasurementSet& ms, const BlockMeasurementOperator& op,
                           const SolverConfig& cfg, SolverOptions options = {});

/// CSV with header `iter,data_fidelity,reg_surrogate,psnr`; psnr empty when absent.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace nlcs
