#include <doctest.h>

#include <cmath>

#include "synmind/common/rng.hpp"
#include "synmind/losses/losses.hpp"
#include "synmind/nncore/grad_check.hpp"
#include "synmind/nncore/layers.hpp"

using namespace synmind;
using namespace synmind::losses;
using nn::Parameter;
using nn::Tape;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(std::vector<std::size_t> shape, CounterRng rng,
                             double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.next_gaussian() * scale;
  return t;
}

double eval_scalar(const std::function<nn::NodeId<double>(Tape<double>&)>& fn) {
  Tape<double> t;
  return t.value(fn(t))[0];
}

}  // namespace

TEST_CASE("bce oracle: coin-flip prediction on (1,0) labels") {
  const double loss = eval_scalar([&](Tape<double>& t) {
    auto probs = t.input(Tensor<double>({1, 2}, {0.5, 0.5}));
    return bce_multilabel(t, probs, Tensor<double>({1, 2}, {1.0, 0.0}));
  });
  CHECK(loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("bce oracle: confident-wrong second category") {
  const double loss = eval_scalar([&](Tape<double>& t) {
    auto probs = t.input(Tensor<double>({1, 2}, {0.9, 0.9}));
    return bce_multilabel(t, probs, Tensor<double>({1, 2}, {1.0, 0.0}));
  });
  const double expected = -(std::log(0.9) + std::log(0.1));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("bce on perfect predictions is bounded by the clamp") {
  const std::size_t m = 8;
  Tensor<double> labels({1, m});
  Tensor<double> probs({1, m});
  for (std::size_t c = 0; c < m; ++c) {
    labels[c] = c % 2 ? 1.0 : 0.0;
    probs[c] = labels[c];
  }
  const double loss = eval_scalar([&](Tape<double>& t) {
    return bce_multilabel(t, t.input(probs), labels);
  });
  CHECK(loss >= 0.0);
  CHECK(loss <= 2.0 * m * kProbClamp);
}

TEST_CASE("bce is permutation-equivariant in category index") {
  Tensor<double> probs({1, 4}, {0.2, 0.7, 0.4, 0.9});
  Tensor<double> labels({1, 4}, {0.0, 1.0, 0.0, 1.0});
  Tensor<double> probs_perm({1, 4}, {0.9, 0.4, 0.7, 0.2});
  Tensor<double> labels_perm({1, 4}, {1.0, 0.0, 1.0, 0.0});
  const double a = eval_scalar([&](Tape<double>& t) {
    return bce_multilabel(t, t.input(probs), labels);
  });
  const double b = eval_scalar([&](Tape<double>& t) {
    return bce_multilabel(t, t.input(probs_perm), labels_perm);
  });
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("bce is convex in predictions (midpoint inequality spot check)") {
  CounterRng rng(21);
  Tensor<double> labels({1, 6});
  for (std::size_t c = 0; c < 6; ++c) labels[c] = rng.next_uniform() < 0.5 ? 0.0 : 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> p1({1, 6}), p2({1, 6}), mid({1, 6});
    for (std::size_t c = 0; c < 6; ++c) {
      p1[c] = 0.05 + 0.9 * rng.next_uniform();
      p2[c] = 0.05 + 0.9 * rng.next_uniform();
      mid[c] = 0.5 * (p1[c] + p2[c]);
    }
    auto loss_of = [&](const Tensor<double>& p) {
      return eval_scalar([&](Tape<double>& t) {
        return bce_multilabel(t, t.input(p), labels);
      });
    };
    CHECK(loss_of(mid) <= 0.5 * (loss_of(p1) + loss_of(p2)) + 1e-12);
  }
}

TEST_CASE("softclip with a single anchor is exactly zero") {
  Tensor<double> targets({1, 3}, {0.3, -0.2, 0.9});
  const double loss = eval_scalar([&](Tape<double>& t) {
    auto preds = t.input(Tensor<double>({1, 3}, {5.0, 1.0, -2.0}));
    return softclip(t, preds, targets, 1.0);
  });
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("softclip oracle: orthonormal pair with matching predictions") {
  Tensor<double> targets({2, 2}, {1.0, 0.0, 0.0, 1.0});
  const double loss = eval_scalar([&](Tape<double>& t) {
    return softclip(t, t.input(targets), targets, 1.0);
  });
  // Soft target row = softmax(1, 0); loss per anchor is its entropy.
  const double p1 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  const double p2 = 1.0 - p1;
  const double entropy = -(p1 * std::log(p1) + p2 * std::log(p2));
  CHECK(loss == doctest::Approx(entropy).epsilon(1e-9));
  CHECK(loss == doctest::Approx(0.58220).epsilon(1e-4));
}

TEST_CASE("softclip at low temperature approaches zero for matching rows") {
  Tensor<double> targets({2, 2}, {1.0, 0.0, 0.0, 1.0});
  const double loss = eval_scalar([&](Tape<double>& t) {
    return softclip(t, t.input(targets), targets, 0.01);
  });
  CHECK(loss < 1e-3);
  CHECK(loss >= 0.0);
}

TEST_CASE("softclip is non-negative on random batches") {
  CounterRng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor<double> targets = random_tensor({4, 6}, rng.fork(trial));
    Tensor<double> preds = random_tensor({4, 6}, rng.fork(100 + trial));
    const double loss = eval_scalar([&](Tape<double>& t) {
      return softclip(t, t.input(preds), targets, 0.125);
    });
    CHECK(loss >= 0.0);
  }
}

TEST_CASE("softclip converges to hard InfoNCE as temperature vanishes") {
  // Orthonormal targets: the soft target matrix tends to the identity, so
  // softclip at tau -> 0+ matches the one-hot loss computed on the same
  // logits. Both sides evaluated at tau = 1e-3.
  Tensor<double> targets({3, 3});
  targets.at(0, 0) = targets.at(1, 1) = targets.at(2, 2) = 1.0;
  CounterRng rng(23);
  Tensor<double> preds = random_tensor({3, 3}, rng, 0.3);
  const double tau = 1e-3;
  const double soft = eval_scalar([&](Tape<double>& t) {
    return softclip(t, t.input(preds), targets, tau);
  });
  const double hard = eval_scalar([&](Tape<double>& t) {
    return contrastive_hard(t, t.input(preds), targets, tau);
  });
  CHECK(std::abs(soft - hard) < 1e-3);
}

TEST_CASE("mixco_mix endpoints and arithmetic") {
  std::vector<double> xi = {2.0, 0.0};
  std::vector<double> xj = {0.0, 2.0};
  auto mixed = mixco_mix<double>(xi, xj, 0.5);
  CHECK(mixed[0] == doctest::Approx(1.0));
  CHECK(mixed[1] == doctest::Approx(1.0));
  auto ident = mixco_mix<double>(xi, xj, 1.0);
  CHECK(ident[0] == xi[0]);
  CHECK(ident[1] == xi[1]);
  CHECK_THROWS_AS(mixco_mix<double>(xi, xj, 1.5), ConfigError);
  CHECK_THROWS_AS(mixco_mix<double>(xi, {1.0}, 0.5), DimensionError);
}

TEST_CASE("mixco oracle: symmetric half mix on orthonormal targets") {
  Tensor<double> targets({2, 2}, {1.0, 0.0, 0.0, 1.0});
  std::vector<MixPair> pairs = {{0, 1, 0.5}, {1, 0, 0.5}};
  const double loss = eval_scalar([&](Tape<double>& t) {
    auto x = t.input(targets);  // encoder = identity
    auto mixed = mix_rows(t, x, pairs);
    return mixco_loss(t, mixed, targets, pairs, 1.0);
  });
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("mixco at alpha=1 equals the hard contrastive loss bit-for-bit") {
  CounterRng rng(24);
  Tensor<double> targets = random_tensor({5, 7}, rng.fork(0));
  Tensor<double> encoded = random_tensor({5, 7}, rng.fork(1));
  std::vector<MixPair> pairs;
  for (std::size_t b = 0; b < 5; ++b) pairs.push_back({b, (b + 2) % 5, 1.0});

  const double mixed = eval_scalar([&](Tape<double>& t) {
    auto enc = t.input(encoded);
    auto x_mixed = mix_rows(t, enc, pairs);
    return mixco_loss(t, x_mixed, targets, pairs, 0.125);
  });
  const double hard = eval_scalar([&](Tape<double>& t) {
    return contrastive_hard(t, t.input(encoded), targets, 0.125);
  });
  CHECK(mixed == hard);  // exact float equality
}

TEST_CASE("sse_mse oracle and trivial cases") {
  Tensor<double> t_target({1, 2}, {1.0, 0.0});
  const double loss = eval_scalar([&](Tape<double>& t) {
    auto enc = t.input(Tensor<double>({1, 2}, {0.0, 0.0}));
    auto den = t.input(Tensor<double>({1, 2}, {0.0, 0.0}));
    return sse_mse(t, enc, den, t_target, 0.5);
  });
  CHECK(loss == doctest::Approx(1.5).epsilon(1e-9));

  const double zero = eval_scalar([&](Tape<double>& t) {
    auto enc = t.input(t_target);
    auto den = t.input(t_target);
    return sse_mse(t, enc, den, t_target, 0.5);
  });
  CHECK(zero == doctest::Approx(0.0));

  // lambda = 0 reduces to plain encoder MSE.
  const double lam0 = eval_scalar([&](Tape<double>& t) {
    auto enc = t.input(Tensor<double>({1, 2}, {0.0, 0.0}));
    auto den = t.input(Tensor<double>({1, 2}, {123.0, -7.0}));
    return sse_mse(t, enc, den, t_target, 0.0);
  });
  CHECK(lam0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sse_mse scales quadratically") {
  CounterRng rng(25);
  Tensor<double> target = random_tensor({2, 6}, rng.fork(0));
  Tensor<double> enc = random_tensor({2, 6}, rng.fork(1));
  Tensor<double> den = random_tensor({2, 6}, rng.fork(2));
  auto loss_at = [&](double c) {
    Tensor<double> tc = target, ec = enc, dc = den;
    for (std::size_t i = 0; i < tc.size(); ++i) {
      tc[i] *= c;
      ec[i] *= c;
      dc[i] *= c;
    }
    return eval_scalar([&](Tape<double>& t) {
      return sse_mse(t, t.input(ec), t.input(dc), tc, 0.5);
    });
  };
  const double base = loss_at(1.0);
  CHECK(loss_at(3.0) == doctest::Approx(9.0 * base).epsilon(1e-9));
}

TEST_CASE("ssv_total applies the published weights") {
  LossWeights w;
  CHECK(w.prior == 1.0);
  CHECK(w.assist == 0.33);
  CHECK(ssv_total(2.0, 3.0, w) == doctest::Approx(2.99).epsilon(1e-12));
  LossWeights no_assist = w;
  no_assist.assist = 0.0;
  CHECK(ssv_total(2.0, 3.0, no_assist) == doctest::Approx(2.0));
  CHECK(ssv_total(0.0, 0.0, w) == doctest::Approx(0.0));
}

TEST_CASE("loss weight defaults match the published configuration") {
  LossWeights w;
  CHECK(w.softclip == 0.1);
  CHECK(w.swm == 0.05);
  CHECK(w.denoising == 0.5);
  CHECK(w.prior == 1.0);
  CHECK(w.assist == 0.33);
}

TEST_CASE("losses reject mismatched shapes and bad temperatures") {
  Tape<double> t;
  auto p = t.input(Tensor<double>({1, 3}, {0.5, 0.5, 0.5}));
  CHECK_THROWS_AS(bce_multilabel(t, p, Tensor<double>({1, 2}, {1.0, 0.0})),
                  DimensionError);
  Tensor<double> targets({2, 3});
  auto q = t.input(Tensor<double>({2, 3}));
  CHECK_THROWS_AS(softclip(t, q, targets, 0.0), ConfigError);
  CHECK_THROWS_AS(softclip(t, q, targets, -1.0), ConfigError);
}

TEST_CASE("every loss passes the gradient check through a small MLP") {
  CounterRng rng(26);
  nn::Mlp<double> mlp("mlp", {5, 8, 6}, rng.fork(0));
  Tensor<double> x = random_tensor({4, 5}, rng.fork(1));
  Tensor<double> targets = random_tensor({4, 6}, rng.fork(2), 0.8);
  Tensor<double> labels({4, 6});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = (i % 3 == 0) ? 1.0 : 0.0;
  }
  std::vector<Parameter<double>*> params;
  mlp.collect(params);

  SUBCASE("bce") {
    auto build = [&](Tape<double>& t) {
      auto h = nn::sigmoid_op(t, mlp.forward(t, t.constant(x)));
      return bce_multilabel(t, h, labels);
    };
    CHECK(nn::gradient_check<double>(build, params, 1e-5).max_rel_error < 1e-4);
  }
  SUBCASE("softclip") {
    auto build = [&](Tape<double>& t) {
      auto h = mlp.forward(t, t.constant(x));
      return softclip(t, h, targets, 0.125);
    };
    CHECK(nn::gradient_check<double>(build, params, 1e-5).max_rel_error < 1e-4);
  }
  SUBCASE("mixco") {
    std::vector<MixPair> pairs = {{0, 1, 0.3}, {1, 2, 0.8}, {2, 3, 0.5},
                                  {3, 0, 0.9}};
    auto build = [&](Tape<double>& t) {
      auto h = mlp.forward(t, t.constant(x));
      auto mixed = mix_rows(t, h, pairs);
      return mixco_loss(t, mixed, targets, pairs, 0.125);
    };
    CHECK(nn::gradient_check<double>(build, params, 1e-5).max_rel_error < 1e-4);
  }
  SUBCASE("sse_mse") {
    auto build = [&](Tape<double>& t) {
      auto h = mlp.forward(t, t.constant(x));
      auto h2 = nn::tanh_op(t, h);
      return sse_mse(t, h, h2, targets, 0.5);
    };
    CHECK(nn::gradient_check<double>(build, params, 1e-5).max_rel_error < 1e-4);
  }
  SUBCASE("ssv_total") {
    auto build = [&](Tape<double>& t) {
      auto h = mlp.forward(t, t.constant(x));
      auto l_prior = mse_loss(t, h, targets);
      auto l_assist = l1_loss(t, h, targets);
      return ssv_total(t, l_prior, l_assist, LossWeights{});
    };
    CHECK(nn::gradient_check<double>(build, params, 1e-5).max_rel_error < 1e-4);
  }
}
