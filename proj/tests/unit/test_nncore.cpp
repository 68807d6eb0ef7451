#include <doctest.h>

#include <cmath>

#include "synmind/common/rng.hpp"
#include "synmind/nncore/grad_check.hpp"
#include "synmind/nncore/layers.hpp"
#include "synmind/nncore/optimizer.hpp"

using namespace synmind;
using namespace synmind::nn;

namespace {

Tensor<double> random_tensor(std::vector<std::size_t> shape, CounterRng rng,
                             double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.next_gaussian() * scale;
  }
  return t;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping and errors") {
  Tensor<double> t({2, 3});
  CHECK(t.size() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK_THROWS_AS(t.reshaped({4}), DimensionError);
  CHECK_THROWS_AS(Tensor<double>({2, 2}, {1.0, 2.0}), DimensionError);
}

TEST_CASE("sum loss gradient is all ones") {
  Tape<double> t;
  auto x = t.input(random_tensor({3, 4}, CounterRng(1)));
  auto loss = sum_all(t, x);
  t.backward(loss);
  const Tensor<double>& g = t.grad(x);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 1.0);
}

TEST_CASE("zero-scaled loss has zero gradient") {
  Tape<double> t;
  auto x = t.input(random_tensor({5}, CounterRng(2)));
  auto loss = sum_all(t, scale(t, x, 0.0));
  t.backward(loss);
  const Tensor<double>& g = t.grad(x);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("matmul shape errors name both operands") {
  Tape<double> t;
  auto a = t.input(Tensor<double>({2, 3}));
  auto b = t.input(Tensor<double>({4, 5}));
  CHECK_THROWS_WITH_AS(matmul(t, a, b), doctest::Contains("(2x3)"),
                       DimensionError);
}

TEST_CASE("residual MLP passes central finite-difference check") {
  CounterRng rng(3);
  Mlp<double> stem("stem", {6, 8}, rng.fork(0));
  ResidualBlock<double> block1("block1", 8, rng.fork(1));
  ResidualBlock<double> block2("block2", 8, rng.fork(2));
  Linear<double> head("head", 8, 3, rng.fork(3));
  Tensor<double> x = random_tensor({4, 6}, rng.fork(10));
  Tensor<double> target = random_tensor({4, 3}, rng.fork(11));

  std::vector<Parameter<double>*> params;
  stem.collect(params);
  block1.collect(params);
  block2.collect(params);
  head.collect(params);

  auto build = [&](Tape<double>& t) {
    auto h = stem.forward(t, t.constant(x));
    h = block1.forward(t, h);
    h = gelu_op(t, h);
    h = block2.forward(t, h);
    auto y = head.forward(t, h);
    auto d = sub(t, y, t.constant(target));
    return mean_all(t, mul(t, d, d));
  };

  auto report = gradient_check<double>(build, params, 1e-5);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("softmax, log-softmax, layer norm pass finite differences") {
  CounterRng rng(4);
  Parameter<double> w("w", random_tensor({5, 5}, rng.fork(0), 0.5));
  Parameter<double> gain("gain", Tensor<double>::full({5}, 1.0));
  Parameter<double> bias("bias", random_tensor({5}, rng.fork(1), 0.1));
  Tensor<double> x = random_tensor({3, 5}, rng.fork(2));
  Tensor<double> soft_labels = random_tensor({3, 5}, rng.fork(3), 0.3);

  auto build = [&](Tape<double>& t) {
    auto h = matmul(t, t.constant(x), t.param(w));
    h = layer_norm(t, h, t.param(gain), t.param(bias));
    auto ls = row_log_softmax(t, h);
    auto sm = row_softmax(t, h);
    auto mix = add(t, mul(t, t.constant(soft_labels), ls), sm);
    return mean_all(t, mix);
  };
  std::vector<Parameter<double>*> params = {&w, &gain, &bias};
  auto report = gradient_check<double>(build, params, 1e-5);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("attention block passes finite differences") {
  CounterRng rng(5);
  AttentionBlock<double> attn("attn", 8, 2, 4, rng.fork(0));
  Tensor<double> x = random_tensor({2, 4, 8}, rng.fork(1), 0.7);

  std::vector<Parameter<double>*> params;
  attn.collect(params);

  auto build = [&](Tape<double>& t) {
    auto y = attn.forward(t, t.constant(x));
    return mean_all(t, mul(t, y, y));
  };
  auto report = gradient_check<double>(build, params, 1e-5);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("attention is causal: token i ignores tokens j > i") {
  CounterRng rng(6);
  AttentionBlock<double> attn("attn", 8, 2, 4, rng.fork(0));
  Tensor<double> x = random_tensor({1, 5, 8}, rng.fork(1));

  Tape<double> t1;
  auto y1 = attn.forward(t1, t1.constant(x));
  Tensor<double> base = t1.value(y1);

  // Perturb the last token; earlier outputs must not move.
  Tensor<double> x2 = x;
  for (std::size_t d = 0; d < 8; ++d) x2.at(0, 4, d) += 10.0;
  Tape<double> t2;
  auto y2 = attn.forward(t2, t2.constant(x2));
  const Tensor<double>& changed = t2.value(y2);

  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t d = 0; d < 8; ++d) {
      CHECK(base.at(0, i, d) == doctest::Approx(changed.at(0, i, d)).epsilon(1e-12));
    }
  }
  // And the perturbed token itself does move.
  double delta = 0.0;
  for (std::size_t d = 0; d < 8; ++d) {
    delta += std::abs(base.at(0, 4, d) - changed.at(0, 4, d));
  }
  CHECK(delta > 1.0);
}

TEST_CASE("residual block with zero inner weights is the identity") {
  ResidualBlock<double> block("block", 6, CounterRng(7));
  for (auto* p : std::vector<Parameter<double>*>{&block.fc1.weight,
                                                 &block.fc1.bias,
                                                 &block.fc2.weight,
                                                 &block.fc2.bias}) {
    std::fill(p->value.data(), p->value.data() + p->value.size(), 0.0);
  }
  Tensor<double> x = random_tensor({3, 6}, CounterRng(8));
  Tape<double> t;
  auto y = block.forward(t, t.constant(x));
  const Tensor<double>& out = t.value(y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("gradient check flags a corrupted backward rule") {
  // tanh forward with a deliberately wrong derivative (1 - y, not 1 - y^2).
  auto bad_tanh = [](Tape<double>& t, NodeId<double> a) {
    const Tensor<double>& x = t.value(a);
    Tensor<double> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    auto out = t.push(std::move(y), true, nullptr);
    t.set_backward(out, [out, a](Tape<double>& tt) {
      const Tensor<double>& g = tt.grad(out);
      const Tensor<double>& y = tt.value(out);
      Tensor<double>& ga = tt.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * (1.0 - y[i]);
      }
    });
    return out;
  };

  CounterRng rng(9);
  Parameter<double> w("w", random_tensor({4, 4}, rng.fork(0)));
  Tensor<double> x = random_tensor({2, 4}, rng.fork(1));
  auto build = [&](Tape<double>& t) {
    auto h = matmul(t, t.constant(x), t.param(w));
    h = bad_tanh(t, h);
    return mean_all(t, mul(t, h, h));
  };
  std::vector<Parameter<double>*> params = {&w};
  auto report = gradient_check<double>(build, params, 1e-5);
  CHECK(report.max_rel_error > 1e-2);
}

TEST_CASE("identity map loss has zero gradient-check error") {
  Parameter<double> w("w", Tensor<double>({3}, {1.0, 2.0, 3.0}));
  auto build = [&](Tape<double>& t) { return sum_all(t, t.param(w)); };
  std::vector<Parameter<double>*> params = {&w};
  auto report = gradient_check<double>(build, params, 1e-5);
  CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  CHECK(cosine_lr(0, 1e-3, 0.0, 100) == doctest::Approx(1e-3));
  CHECK(cosine_lr(100, 1e-3, 0.0, 100) == doctest::Approx(0.0));
  CHECK(cosine_lr(50, 1e-3, 0.0, 100) == doctest::Approx(5e-4));
  // Out-of-range steps clamp to the endpoints.
  CHECK(cosine_lr(200, 1e-3, 1e-5, 100) == doctest::Approx(1e-5));
}

TEST_CASE("adam leaves parameters unchanged under zero gradient") {
  Parameter<double> p("p", Tensor<double>({3}, {1.0, -2.0, 0.5}));
  p.zero_grad();
  Adam<double> adam;
  adam.step({&p}, 0.1);
  CHECK(p.value[0] == 1.0);
  CHECK(p.value[1] == -2.0);
  CHECK(p.value[2] == 0.5);
}

TEST_CASE("single adam step matches the closed-form update") {
  Parameter<double> p("p", Tensor<double>::scalar(1.0));
  p.grad[0] = 1.0;
  Adam<double> adam;
  adam.step({&p}, 0.1);
  // m_hat = v_hat = 1 after bias correction, so the step is lr/(1 + eps).
  const double expected = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
  CHECK(p.value[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(1.0 - p.value[0] == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("adam throws on NaN gradients with the parameter name") {
  Parameter<double> p("swm.weight", Tensor<double>::scalar(1.0));
  p.grad[0] = std::nan("");
  Adam<double> adam;
  CHECK_THROWS_WITH_AS(adam.step({&p}, 0.1), doctest::Contains("swm.weight"),
                       TrainingError);
}

TEST_CASE("training loop is bit-deterministic across reruns") {
  auto run = [&]() {
    CounterRng rng(10);
    Linear<double> layer("l", 4, 4, rng.fork(0));
    Tensor<double> x = random_tensor({8, 4}, rng.fork(1));
    Tensor<double> target = random_tensor({8, 4}, rng.fork(2));
    Adam<double> adam;
    std::vector<Parameter<double>*> params;
    layer.collect(params);
    for (int step = 0; step < 100; ++step) {
      for (auto* p : params) p->zero_grad();
      Tape<double> t;
      auto y = layer.forward(t, t.constant(x));
      auto d = sub(t, y, t.constant(target));
      auto loss = mean_all(t, mul(t, d, d));
      t.backward(loss);
      adam.step(params, cosine_lr(step, 1e-2, 0.0, 100));
    }
    return layer.weight.value;
  };
  Tensor<double> a = run();
  Tensor<double> b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
