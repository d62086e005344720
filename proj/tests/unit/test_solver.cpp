#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "nlcs/error.hpp"
#include "nlcs/solver.hpp"
#include "oracles.hpp"

using namespace nlcs;

namespace {

SolverConfig small_config(Regularizer reg) {
  SolverConfig cfg = SolverConfig::defaults_for(reg);
  cfg.block_size = 8;
  cfg.patch_side = 4;
  cfg.group_size = 8;
  cfg.search_window = 12;
  cfg.patch_stride = 2;
  cfg.outer_iters = 3;
  return cfg;
}

SolverConfig zero_weights(SolverConfig cfg) {
  cfg.lambda = 0.0;
  cfg.tau = 0.0;
  cfg.k_wnnm = 0.0;
  return cfg;
}

Image phantom(int n) {
  Image img(n, n, 40.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      if (r > n / 4 && r < 3 * n / 4 && c > n / 5 && c < n / 2) img(r, c) = 200.0;
      const double dr = r - 0.65 * n, dc = c - 0.7 * n;
      if (dr * dr + dc * dc < 0.03 * n * n) img(r, c) = 120.0;
    }
  return img;
}

}  // namespace

TEST(Initialize, ZeroMeasurementsGiveZeroImage) {
  const BlockMeasurementOperator op(8, 0.3, 1);
  const MeasurementSet ms = sample(Image(16, 16), op);
  EXPECT_EQ(initialize(ms, op), Image(16, 16));
}

TEST(Solver, FullRateZeroWeightsReturnsOriginal) {
  std::mt19937_64 gen(1);
  const Image x = oracle::random_image(gen, 16, 16);
  const BlockMeasurementOperator op(8, 1.0, 2);
  const MeasurementSet ms = sample(x, op);
  for (auto reg : {Regularizer::gsr, Regularizer::gsrc, Regularizer::nlr, Regularizer::rrc, Regularizer::lrgsc}) {
    for (double eta : {0.0, 0.5}) {
      SolverConfig cfg = zero_weights(small_config(reg));
      cfg.outer_iters = 1;
      cfg.eta = eta;
      const Reconstruction rec = reconstruct(ms, op, cfg);
      EXPECT_LT((rec.image.as_vector() - x.as_vector()).cwiseAbs().maxCoeff(), 1e-6) << to_string(reg);
    }
  }
}

TEST(Solver, EtaZeroFullRateIsDirectInversion) {
  std::mt19937_64 gen(2);
  const Image x = oracle::random_image(gen, 16, 8);
  const BlockMeasurementOperator op(8, 1.0, 3);
  const MeasurementSet ms = sample(x, op);
  SolverConfig cfg = small_config(Regularizer::gsrc);
  cfg.eta = 0.0;
  cfg.outer_iters = 2;
  const Reconstruction rec = reconstruct(ms, op, cfg);
  const Matrix inv = op.phi().inverse();
  Image direct(16, 8);
  for (int k = 0; k < ms.block_count(); ++k) scatter_block(direct, 8, k, inv * ms.values.col(k));
  EXPECT_LT((rec.image.as_vector() - direct.as_vector()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solver, ZeroMeasurementsStayZero) {
  const BlockMeasurementOperator op(8, 0.25, 4);
  const MeasurementSet ms = sample(Image(16, 16), op);
  for (auto reg : {Regularizer::gsr, Regularizer::gsrc, Regularizer::nlr, Regularizer::rrc, Regularizer::lrgsc}) {
    const Reconstruction rec = reconstruct(ms, op, small_config(reg));
    EXPECT_EQ(rec.image.as_vector().cwiseAbs().maxCoeff(), 0.0) << to_string(reg);
  }
}

TEST(Solver, PhantomFidelityDecreases) {
  const Image x = phantom(64);
  const BlockMeasurementOperator op(32, 0.3, 5);
  const MeasurementSet ms = sample(x, op);
  SolverConfig cfg = SolverConfig::defaults_for(Regularizer::gsrc);
  cfg.outer_iters = 20;
  const Reconstruction rec = reconstruct(ms, op, cfg);
  ASSERT_EQ(rec.trace.size(), 20u);
  EXPECT_LT(rec.trace.back().data_fidelity, rec.trace.front().data_fidelity);
}

TEST(Solver, TraceShapeAndPsnrPresence) {
  std::mt19937_64 gen(3);
  const Image x = oracle::random_image(gen, 16, 16);
  const BlockMeasurementOperator op(8, 0.4, 6);
  const MeasurementSet ms = sample(x, op);
  const SolverConfig cfg = small_config(Regularizer::nlr);
  const Reconstruction plain = reconstruct(ms, op, cfg);
  ASSERT_EQ(plain.trace.size(), 3u);
  for (std::size_t i = 0; i < plain.trace.size(); ++i) {
    EXPECT_EQ(plain.trace[i].iter, static_cast<int>(i + 1));
    EXPECT_FALSE(plain.trace[i].psnr.has_value());
  }
  SolverOptions opts;
  opts.ground_truth = &x;
  const Reconstruction traced = reconstruct(ms, op, cfg, opts);
  for (const auto& row : traced.trace) EXPECT_TRUE(row.psnr.has_value());

  std::ostringstream csv;
  write_trace_csv(csv, plain.trace);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,data_fidelity,reg_surrogate,psnr");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Solver, TraceFidelityIsRecomputable) {
  std::mt19937_64 gen(4);
  const Image x = oracle::random_image(gen, 24, 16);
  const BlockMeasurementOperator op(8, 0.3, 7);
  const MeasurementSet ms = sample(x, op);
  Solver solver(ms, op, small_config(Regularizer::rrc));
  const TraceRow row = solver.step();
  double manual = 0.0;
  for (int k = 0; k < ms.block_count(); ++k) {
    manual += 0.5 * (ms.values.col(k) - op.phi() * block_vector(solver.state().x_hat, 8, k)).squaredNorm();
  }
  EXPECT_NEAR(row.data_fidelity, manual, 1e-8 * std::max(1.0, manual));
  const ObjectiveReport rep = objective_report(solver.state(), ms, op);
  EXPECT_NEAR(rep.data_fidelity, manual, 1e-8 * std::max(1.0, manual));
  EXPECT_EQ(rep.reg_surrogate, row.reg_surrogate);
}

TEST(Objective, ExactAndZeroStates) {
  std::mt19937_64 gen(5);
  const Image x = oracle::random_image(gen, 16, 16);
  const BlockMeasurementOperator op(8, 0.5, 8);
  EXPECT_LT(data_fidelity(sample(x, op), op, x), 1e-10);
  SolverState zero;
  zero.x_hat = Image(16, 16);
  const ObjectiveReport rep = objective_report(zero, sample(Image(16, 16), op), op);
  EXPECT_EQ(rep.data_fidelity, 0.0);
  EXPECT_EQ(rep.reg_surrogate, 0.0);
}

TEST(Solver, DeterministicAndThreadIndependent) {
  std::mt19937_64 gen(6);
  const Image x = oracle::random_image(gen, 32, 24);
  const BlockMeasurementOperator op(8, 0.3, 9);
  const MeasurementSet ms = sample(x, op);
  const SolverConfig cfg = small_config(Regularizer::lrgsc);
  SolverOptions serial;
  serial.threads = 1;
  const Reconstruction a = reconstruct(ms, op, cfg, serial);
  const Reconstruction b = reconstruct(ms, op, cfg, serial);
  EXPECT_EQ(a.image, b.image);
  SolverOptions threaded;
  threaded.threads = 3;
  const Reconstruction c = reconstruct(ms, op, cfg, threaded);
  EXPECT_LT((a.image.as_vector() - c.image.as_vector()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solver, HsseWithoutGmmIsConfigError) {
  const BlockMeasurementOperator op(8, 0.3, 1);
  const MeasurementSet ms = sample(Image(16, 16, 5.0), op);
  EXPECT_THROW(Solver(ms, op, small_config(Regularizer::hsse)), ConfigError);
}

TEST(Solver, MismatchedOperatorRejected) {
  const BlockMeasurementOperator op(8, 0.3, 1);
  const MeasurementSet ms = sample(Image(16, 16, 5.0), op);
  EXPECT_THROW(Solver(ms, BlockMeasurementOperator(8, 0.3, 2), small_config(Regularizer::gsr)), OperatorMismatchError);
}

TEST(Solver, NonFiniteEstimateNamesIteration) {
  const BlockMeasurementOperator op(8, 0.3, 1);
  MeasurementSet ms = sample(Image(16, 16, 5.0), op);
  ms.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Solver solver(ms, op, small_config(Regularizer::gsrc));
  try {
    solver.step();
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.iteration(), 1);
  } catch (const std::exception&) {
    // grouping may reject NaN pixels first; either way the run must not succeed
  }
}

TEST(Solver, RelativeChangeStop) {
  const BlockMeasurementOperator op(8, 1.0, 1);
  std::mt19937_64 gen(7);
  const MeasurementSet ms = sample(oracle::random_image(gen, 16, 16), op);
  SolverConfig cfg = zero_weights(small_config(Regularizer::gsrc));
  cfg.outer_iters = 10;
  cfg.rel_tol = 1e-4;
  const Reconstruction rec = reconstruct(ms, op, cfg);
  EXPECT_LT(rec.trace.size(), 10u);
}

TEST(Solver, IterationCallback) {
  const BlockMeasurementOperator op(8, 0.3, 1);
  const MeasurementSet ms = sample(Image(16, 16, 5.0), op);
  int calls = 0;
  SolverOptions opts;
  opts.on_iteration = [&](const TraceRow& row) { EXPECT_EQ(row.iter, ++calls); };
  reconstruct(ms, op, small_config(Regularizer::gsr), opts);
  EXPECT_EQ(calls, 3);
}
