// Serial-vs-OpenMP comparison for the hot kernels and the renderer.
// Run with --benchmark_filter=axpby (etc.) to narrow down.

#include <benchmark/benchmark.h>

#include <vector>

#include "journey/geometry.hpp"
#include "journey/gmm.hpp"
#include "journey/kernels.hpp"
#include "journey/random.hpp"

using namespace journey;

namespace {

std::vector<double> random_vec(size_t n, uint64_t seed) {
  RandomSource rng(seed);
  std::vector<double> v(n);
  rng.fill_normal(v);
  return v;
}

void bm_axpby_serial(benchmark::State& state) {
  const size_t n = state.range(0);
  const auto x = random_vec(n, 1), y = random_vec(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::serial::axpby(0.99, x, 0.1, y, out);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(state.iterations() * n * 3 * sizeof(double));
}

void bm_axpby_parallel(benchmark::State& state) {
  const size_t n = state.range(0);
  const auto x = random_vec(n, 1), y = random_vec(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::axpby(0.99, x, 0.1, y, out);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(state.iterations() * n * 3 * sizeof(double));
}

void bm_sum_sq_diff_serial(benchmark::State& state) {
  const size_t n = state.range(0);
  const auto x = random_vec(n, 3), y = random_vec(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::sum_sq_diff(x, y));
  state.SetBytesProcessed(state.iterations() * n * 2 * sizeof(double));
}

void bm_sum_sq_diff_parallel(benchmark::State& state) {
  const size_t n = state.range(0);
  const auto x = random_vec(n, 3), y = random_vec(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sum_sq_diff(x, y));
  state.SetBytesProcessed(state.iterations() * n * 2 * sizeof(double));
}

GmmPrior bench_prior(int components, int f, int h, int w) {
  RandomSource rng(5);
  GmmPrior prior;
  for (int i = 0; i < components; ++i) {
    GmmComponent comp;
    comp.weight = 1.0 / components;
    comp.mean = Video(f, h, w, 3);
    rng.fill_normal(comp.mean);
    comp.sigma = 0.0;
    prior.components.push_back(std::move(comp));
  }
  return prior;
}

void bm_gmm_predict_eps(benchmark::State& state) {
  const NoiseSchedule s = default_schedule();
  const GmmPrior prior = bench_prior(4, state.range(0), 16, 16);
  Video x(state.range(0), 16, 16, 3);
  RandomSource rng(6);
  rng.fill_normal(x);
  for (auto _ : state)
    benchmark::DoNotOptimize(gmm_predict_eps(x, 500, prior, s));
}

PointCloud bench_cloud(size_t points) {
  RandomSource rng(7);
  PointCloud cloud;
  cloud.channels = 3;
  for (size_t i = 0; i < points; ++i) {
    cloud.positions.push_back(
        {rng.normal() * 0.4, rng.normal() * 0.4, 1.0 + 3.0 * rng.uniform()});
    for (int c = 0; c < 3; ++c) cloud.colors.push_back(rng.uniform());
  }
  return cloud;
}

void bm_render_serial(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(state.range(0));
  const CameraIntrinsics K = default_intrinsics(64, 64);
  for (auto _ : state)
    benchmark::DoNotOptimize(render_serial(cloud, CameraPose{}, K));
}

void bm_render_parallel(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(state.range(0));
  const CameraIntrinsics K = default_intrinsics(64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(render(cloud, CameraPose{}, K));
}

}  // namespace

BENCHMARK(bm_axpby_serial)->Arg(1 << 12)->Arg(1 << 17)->Arg(1 << 21);
BENCHMARK(bm_axpby_parallel)->Arg(1 << 12)->Arg(1 << 17)->Arg(1 << 21);
BENCHMARK(bm_sum_sq_diff_serial)->Arg(1 << 12)->Arg(1 << 17)->Arg(1 << 21);
BENCHMARK(bm_sum_sq_diff_parallel)->Arg(1 << 12)->Arg(1 << 17)->Arg(1 << 21);
BENCHMARK(bm_gmm_predict_eps)->Arg(8)->Arg(56);
BENCHMARK(bm_render_serial)->Arg(100000)->Arg(1000000);
BENCHMARK(bm_render_parallel)->Arg(100000)->Arg(1000000);

BENCHMARK_MAIN();
