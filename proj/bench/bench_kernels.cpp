// Serial reference vs OpenMP paths of the hot kernels, plus the literal
// permutation sum vs the arrangement reduction for element construction.

#include <benchmark/benchmark.h>

#include "minmeas/fidelity.hpp"
#include "minmeas/kernels.hpp"
#include "minmeas/povm.hpp"

using namespace minmeas;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

void BM_TensorPower(benchmark::State& state) {
  const Eigen::Matrix2cd rho = density_from_bloch(BlochState(0.1, 0.2, 0.3)).matrix();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::tensor_power(rho, n, exec_of(state)));
}
BENCHMARK(BM_TensorPower)->ArgsProduct({{6, 8, 10}, {0, 1}})->ArgNames({"N", "parallel"});

void BM_ArrangementSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto arr = kernels::arrangements(n, n / 2 - 1);
  const Spinor z = coherent_spinor(Vec3(0.3, -0.4, 0.5).normalized());
  for (auto _ : state) benchmark::DoNotOptimize(kernels::arrangement_sum(n, arr, z, exec_of(state)));
}
BENCHMARK(BM_ArrangementSum)->ArgsProduct({{6, 8, 10}, {0, 1}})->ArgNames({"N", "parallel"});

void BM_ElementMoments(benchmark::State& state) {
  const RadialPrior prior = RadialPrior::uniform_ball();
  const int n = static_cast<int>(state.range(0));
  const Povm povm = build_povm(n, prior);
  for (auto _ : state) {
    benchmark::DoNotOptimize(element_moments(povm, prior, kDefaultQuadratureOrder, n + 2, exec_of(state)));
  }
}
BENCHMARK(BM_ElementMoments)->ArgsProduct({{3, 4, 5}, {0, 1}})->ArgNames({"N", "parallel"})->Unit(benchmark::kMillisecond);

void BM_ElementReference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_element_reference(n, n % 2, Vec3::UnitZ(), 1.0));
}
BENCHMARK(BM_ElementReference)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

void BM_ElementCoset(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_element(n, n % 2, Vec3::UnitZ(), 1.0));
}
BENCHMARK(BM_ElementCoset)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
