#include <benchmark/benchmark.h>

#include "synmind/common/rng.hpp"
#include "synmind/metrics/identification.hpp"
#include "synmind/metrics/image_metrics.hpp"

using namespace synmind;

namespace {

nn::Tensor<double> random_image(std::size_t side, std::uint64_t seed) {
  CounterRng rng(seed);
  nn::Tensor<double> img({side, side});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.next_uniform();
  return img;
}

void bench_ssim(benchmark::State& state) {
  auto a = random_image(16, 1);
  auto b = random_image(16, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::ssim(a, b));
  }
}

void bench_pixcorr(benchmark::State& state) {
  auto a = random_image(16, 3);
  auto b = random_image(16, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::pixcorr(a, b));
  }
}

void bench_extractor(benchmark::State& state) {
  metrics::FeatureExtractor deep(metrics::ExtractorKind::DeepB);
  auto img = random_image(16, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deep.features(img));
  }
}

void bench_two_way(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  metrics::FeatureExtractor deep(metrics::ExtractorKind::DeepB);
  std::vector<nn::Tensor<double>> recons, truths;
  for (std::size_t i = 0; i < n; ++i) {
    recons.push_back(random_image(16, 100 + i));
    truths.push_back(random_image(16, 200 + i));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        metrics::two_way_identification(deep, recons, truths));
  }
}

}  // namespace

BENCHMARK(bench_ssim);
BENCHMARK(bench_pixcorr);
BENCHMARK(bench_extractor);
BENCHMARK(bench_two_way)->Arg(16)->Arg(64);
