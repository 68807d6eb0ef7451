#include <benchmark/benchmark.h>

#include "synmind/common/rng.hpp"
#include "synmind/nncore/layers.hpp"
#include "synmind/nncore/optimizer.hpp"

using namespace synmind;
using namespace synmind::nn;

namespace {

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  CounterRng rng(seed);
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(rng.next_gaussian());
  }
  return t;
}

template <typename T>
void bench_matmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Tensor<T> a = random_tensor<T>({n, n}, 1);
  Tensor<T> b = random_tensor<T>({n, n}, 2);
  Tensor<T> c({n, n});
  for (auto _ : state) {
    std::fill(c.data(), c.data() + c.size(), T(0));
    gemm_nn_acc(a.data(), b.data(), c.data(), n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

template <typename T>
void bench_attention_forward(benchmark::State& state) {
  AttentionBlock<T> block("b", 32, 4, 8, CounterRng(3));
  Tensor<T> x = random_tensor<T>({64, 8, 32}, 4);
  for (auto _ : state) {
    Tape<T> t;
    auto y = block.forward(t, t.constant(x));
    benchmark::DoNotOptimize(t.value(y).data());
  }
}

template <typename T>
void bench_train_step(benchmark::State& state) {
  CounterRng rng(5);
  Mlp<T> mlp("mlp", {64, 64, 64, 256}, rng.fork(0));
  Tensor<T> x = random_tensor<T>({64, 64}, 6);
  Tensor<T> target = random_tensor<T>({64, 256}, 7);
  std::vector<Parameter<T>*> params;
  mlp.collect(params);
  Adam<T> adam;
  std::size_t step = 0;
  for (auto _ : state) {
    for (auto* p : params) p->zero_grad();
    Tape<T> t;
    auto y = mlp.forward(t, t.constant(x));
    auto d = sub(t, y, t.constant(target));
    auto loss = mean_all(t, mul(t, d, d));
    t.backward(loss);
    adam.step(params, static_cast<T>(cosine_lr(step++, 1e-3, 0.0, 1000000)));
    benchmark::DoNotOptimize(params[0]->value.data());
  }
}

}  // namespace

BENCHMARK(bench_matmul<float>)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bench_matmul<double>)->Arg(64)->Arg(128);
BENCHMARK(bench_attention_forward<float>);
BENCHMARK(bench_attention_forward<double>);
BENCHMARK(bench_train_step<float>);
BENCHMARK(bench_train_step<double>);
