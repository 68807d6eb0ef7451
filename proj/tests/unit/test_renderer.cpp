#include <doctest.h>

#include "synmind/common/rng.hpp"
#include "synmind/renderer/decoder.hpp"

using namespace synmind;
using namespace synmind::render;
using nn::Tensor;

namespace {

Tensor<double> random_vec(std::size_t n, CounterRng rng) {
  Tensor<double> v({n});
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_gaussian();
  return v;
}

std::vector<RendererExample<double>> toy_examples(bool with_visual,
                                                  std::size_t count) {
  // Pixels are a fixed linear-sigmoid function of the embedding, so a small
  // decoder can actually fit them.
  CounterRng rng(42);
  Tensor<double> map({16, 16 * 16});
  for (std::size_t i = 0; i < map.size(); ++i) {
    map[i] = rng.next_gaussian() * 0.3;
  }
  std::vector<RendererExample<double>> examples;
  for (std::size_t i = 0; i < count; ++i) {
    RendererExample<double> ex;
    ex.semantic = random_vec(16, rng.fork(i));
    if (with_visual) ex.visual = random_vec(8, rng.fork(1000 + i));
    ex.pixels = Tensor<double>({16 * 16});
    for (std::size_t p = 0; p < 256; ++p) {
      double acc = 0.0;
      for (std::size_t e = 0; e < 16; ++e) acc += map[e * 256 + p] * ex.semantic[e];
      ex.pixels[p] = 1.0 / (1.0 + std::exp(-acc));
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace

TEST_CASE("rendered pixels always land in [0, 1]") {
  auto renderer = DecoderRenderer<double>::create(16, 16, std::nullopt, 32, 3);
  CounterRng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor<double> sem = random_vec(16, rng.fork(trial));
    Tensor<double> img = renderer.render(sem);
    CHECK(img.shape() == std::vector<std::size_t>{16, 16});
    for (std::size_t i = 0; i < img.size(); ++i) {
      CHECK(img[i] >= 0.0);
      CHECK(img[i] <= 1.0);
    }
  }
}

TEST_CASE("rendering is deterministic") {
  auto renderer = DecoderRenderer<double>::create(16, 16, std::nullopt, 32, 3);
  Tensor<double> sem = random_vec(16, CounterRng(9));
  Tensor<double> a = renderer.render(sem);
  Tensor<double> b = renderer.render(sem);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("zero-weight decoder renders the constant bias image") {
  auto renderer = DecoderRenderer<double>::create(8, 4, std::nullopt, 8, 3);
  for (auto* p : renderer.parameters()) {
    std::fill(p->value.data(), p->value.data() + p->value.size(), 0.0);
  }
  // Put a recognizable bias on the output layer.
  auto& out_bias = renderer.semantic_branch.layers.back().bias;
  std::fill(out_bias.value.data(), out_bias.value.data() + out_bias.value.size(),
            0.4);
  Tensor<double> img = renderer.render(random_vec(4, CounterRng(2)));
  const double expected = 1.0 / (1.0 + std::exp(-0.4));
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(img[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gate frozen at zero makes the visual branch inert") {
  auto renderer = DecoderRenderer<double>::create(8, 6, std::size_t{4}, 8, 7);
  renderer.gate.value[0] = 0.0;
  CounterRng rng(3);
  Tensor<double> sem = random_vec(6, rng.fork(0));
  Tensor<double> vis = random_vec(4, rng.fork(1));
  Tensor<double> with = renderer.render(sem, &vis);
  Tensor<double> without = renderer.render(sem, nullptr);
  for (std::size_t i = 0; i < with.size(); ++i) CHECK(with[i] == without[i]);

  renderer.gate.value[0] = 0.8;
  Tensor<double> gated = renderer.render(sem, &vis);
  double delta = 0.0;
  for (std::size_t i = 0; i < gated.size(); ++i) {
    delta += std::abs(gated[i] - without[i]);
  }
  CHECK(delta > 1e-6);
}

TEST_CASE("the semantic-only path never reads a visual embedding") {
  auto renderer = DecoderRenderer<double>::create(8, 6, std::nullopt, 8, 7);
  Tensor<double> sem = random_vec(6, CounterRng(4));
  Tensor<double> vis = random_vec(4, CounterRng(5));
  Tensor<double> a = renderer.render(sem, &vis);
  Tensor<double> b = renderer.render(sem, nullptr);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("decoder training is seeded-deterministic and reduces pixel error") {
  auto examples = toy_examples(false, 40);
  RendererTrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 20;
  cfg.seed = 11;
  cfg.hidden = 32;

  auto r1 = train_decoder<double>(examples, 16, cfg);
  auto r2 = train_decoder<double>(examples, 16, cfg);
  for (std::size_t i = 0; i < r1.semantic_branch.layers[0].weight.value.size();
       ++i) {
    CHECK(r1.semantic_branch.layers[0].weight.value[i] ==
          r2.semantic_branch.layers[0].weight.value[i]);
  }

  auto untrained = DecoderRenderer<double>::create(16, 16, std::nullopt,
                                                   cfg.hidden, cfg.seed);
  auto mse_of = [&](DecoderRenderer<double>& r) {
    double total = 0.0;
    for (const auto& ex : examples) {
      Tensor<double> img = r.render(ex.semantic);
      for (std::size_t p = 0; p < img.size(); ++p) {
        const double d = img[p] - ex.pixels[p];
        total += d * d;
      }
    }
    return total;
  };
  CHECK(mse_of(r1) < 0.5 * mse_of(untrained));
}

TEST_CASE("train_decoder validates example shapes") {
  auto examples = toy_examples(false, 4);
  examples[2].pixels = Tensor<double>({4});
  CHECK_THROWS_AS(train_decoder<double>(examples, 16, {}), DimensionError);
  CHECK_THROWS_AS(train_decoder<double>({}, 16, {}), ConfigError);
}
