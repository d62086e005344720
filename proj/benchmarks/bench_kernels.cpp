#include <benchmark/benchmark.h>

#include <random>

#include "nlcs/grouping.hpp"
#include "nlcs/regularizers.hpp"
#include "nlcs/sampling.hpp"
#include "nlcs/shrinkage.hpp"

using namespace nlcs;

namespace {

Matrix random_group(int b, int m, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 20.0);
  Matrix x(b, m);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 100.0 + n(gen);
  return x;
}

Image random_image(int w, int h) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image img(w, h);
  for (double& p : img.pixels()) p = u(gen);
  return img;
}

void BM_Decompose(benchmark::State& state) {
  const Matrix x = random_group(64, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(x));
}
BENCHMARK(BM_Decompose)->Arg(16)->Arg(60);

void BM_Svt(benchmark::State& state) {
  const Matrix x = random_group(64, 60, 2);
  for (auto _ : state) benchmark::DoNotOptimize(svt(x, 300.0));
}
BENCHMARK(BM_Svt);

void BM_ExtractGroups(benchmark::State& state) {
  const Image img = random_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  const GroupingParams p{8, 60, 40, 4};
  for (auto _ : state) benchmark::DoNotOptimize(extract_groups(img, p));
}
BENCHMARK(BM_ExtractGroups)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Prox(benchmark::State& state) {
  const auto reg = static_cast<Regularizer>(state.range(0));
  SolverConfig cfg = SolverConfig::defaults_for(reg);
  const GroupContext ctx = GroupContext::from(cfg);
  const Matrix x = random_group(64, 60, 4);
  for (auto _ : state) benchmark::DoNotOptimize(apply_regularizer(reg, x, ctx));
  state.SetLabel(std::string(to_string(reg)));
}
BENCHMARK(BM_Prox)
    ->Arg(static_cast<int>(Regularizer::gsr))
    ->Arg(static_cast<int>(Regularizer::gsrc))
    ->Arg(static_cast<int>(Regularizer::nlr))
    ->Arg(static_cast<int>(Regularizer::rrc))
    ->Arg(static_cast<int>(Regularizer::lrgsc))
    ->Arg(static_cast<int>(Regularizer::trunc));

void BM_DataUpdate(benchmark::State& state) {
  const BlockMeasurementOperator op(32, 0.1, 1);
  const Image truth = random_image(128, 128);
  const MeasurementSet ms = sample(truth, op);
  const BlockDataUpdate update(op, 0.5);
  const Image z = random_image(128, 128);
  for (auto _ : state) benchmark::DoNotOptimize(update.apply(z, ms));
}
BENCHMARK(BM_DataUpdate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
