#include <benchmark/benchmark.h>

#include <random>

#include "orbitpose/autodiff.hpp"
#include "orbitpose/compatibility.hpp"
#include "orbitpose/dataset.hpp"
#include "orbitpose/geometry.hpp"
#include "orbitpose/vae.hpp"

using namespace orbitpose;

namespace {

PointVolume triangle() { return PointVolume::planar({{0.9, 0.0}, {-0.2, 0.6}, {-0.2, -0.6}}, {1, 1, 1}, 1.0); }

Dataset bench_dataset(int count) {
  DatasetSettings s;
  s.count = count;
  return generate_dataset(random_compatible_volume(3, 7), s);
}

void BM_Rasterize(benchmark::State& state) {
  const auto v = triangle();
  const auto raster = RasterSettings::for_radius(1.0, static_cast<int>(state.range(0)));
  double theta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize(project_at(v, theta), raster));
    theta += 0.01;
  }
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(256);

void BM_CheckInjectivityGrid(benchmark::State& state) {
  const auto v = random_compatible_volume(static_cast<int>(state.range(0)), 7);
  const auto settings = CheckSettings::exact(720);
  for (auto _ : state) benchmark::DoNotOptimize(check_injectivity(v, settings));
}
BENCHMARK(BM_CheckInjectivityGrid)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_CheckInjectivityAlgebraic(benchmark::State& state) {
  const auto v = random_compatible_volume(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(check_injectivity_algebraic(v));
}
BENCHMARK(BM_CheckInjectivityAlgebraic)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_BatchLossBackward(benchmark::State& state) {
  const auto data = bench_dataset(64);
  const auto model = make_model(64, VaeHyperparams{}, 1);
  ad::Tensor images(64, 64);
  for (int i = 0; i < 64; ++i) {
    const auto& px = data.samples[static_cast<std::size_t>(i)].image.pixels();
    for (int j = 0; j < 64; ++j) images(i, j) = px[static_cast<std::size_t>(j)];
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  ad::Tensor eps(64, 1);
  for (int i = 0; i < 64; ++i) eps(i, 0) = n(rng);
  for (auto _ : state) {
    const auto loss = graph::batch_loss(model, images, eps);
    ad::backward(loss.total);
    benchmark::DoNotOptimize(loss.total->value);
  }
}
BENCHMARK(BM_BatchLossBackward)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = bench_dataset(2000);
  VaeHyperparams h;
  h.epochs = 1;
  h.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, h));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
