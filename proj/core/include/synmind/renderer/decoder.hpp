#pragma once

#include <map>
#include <optional>
#include <ostream>

#include "synmind/nncore/layers.hpp"
#include "synmind/nncore/optimizer.hpp"

namespace synmind::render {

using nn::NodeId;
using nn::Tape;
using nn::Tensor;

template <typename T>
struct RendererExample {
  Tensor<T> semantic;                // flat semantic embedding (E)
  std::optional<Tensor<T>> visual;   // flat visual embedding (V)
  Tensor<T> pixels;                  // flat target image (side * side)
};

struct RendererTrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double base_lr = 2e-3;
  double min_lr = 0.0;
  std::uint64_t seed = 1;
  std::size_t hidden = 128;
};

/// Trainable decoder standing in for a frozen generative back-end: a
/// semantic MLP branch, an optional visual branch that initializes the
/// output latent, and a learned additive gate fusing them. Rendering is a
/// pure function of the weights; pixels land in [0, 1] through a sigmoid.
template <typename T>
struct DecoderRenderer {
  std::size_t side = 0;
  std::size_t semantic_dim = 0;
  std::optional<std::size_t> visual_dim;
  nn::Mlp<T> semantic_branch;
  std::optional<nn::Mlp<T>> visual_branch;
  nn::Parameter<T> gate;

  static DecoderRenderer create(std::size_t side, std::size_t semantic_dim,
                                std::optional<std::size_t> visual_dim,
                                std::size_t hidden, std::uint64_t seed) {
    DecoderRenderer r;
    r.side = side;
    r.semantic_dim = semantic_dim;
    r.visual_dim = visual_dim;
    CounterRng rng(seed);
    r.semantic_branch = nn::Mlp<T>(
        "renderer.semantic", {semantic_dim, hidden, side * side},
        rng.fork("sem"));
    if (visual_dim) {
      r.visual_branch = nn::Mlp<T>(
          "renderer.visual", {*visual_dim, hidden, side * side},
          rng.fork("vis"));
      r.gate = nn::Parameter<T>("renderer.gate", Tensor<T>::scalar(T(0.5)));
    } else {
      r.gate = nn::Parameter<T>("renderer.gate", Tensor<T>::scalar(T(0)));
    }
    return r;
  }

  /// semantic: (B, E); visual: (B, V) or invalid node id (-1) when absent.
  NodeId<T> forward(Tape<T>& t, NodeId<T> semantic, NodeId<T> visual = -1) {
    NodeId<T> logits = semantic_branch.forward(t, semantic);
    if (visual_branch && visual >= 0) {
      NodeId<T> v = visual_branch->forward(t, visual);
      logits = nn::add(t, logits, nn::mul_scalar_node(t, v, t.param(gate)));
    }
    return nn::sigmoid_op(t, logits);
  }

  /// Renders one image. The semantic-only path never reads `visual`.
  Tensor<T> render(const Tensor<T>& semantic, const Tensor<T>* visual = nullptr) {
    Tensor<T> sem_flat = semantic.reshaped({std::size_t{1}, semantic.size()});
    Tape<T> t;
    NodeId<T> sem = t.constant(std::move(sem_flat));
    NodeId<T> vis = -1;
    if (visual_branch && visual != nullptr) {
      vis = t.constant(visual->reshaped({std::size_t{1}, visual->size()}));
    }
    NodeId<T> out = forward(t, sem, vis);
    return t.value(out).reshaped({side, side});
  }

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    semantic_branch.collect(out);
    if (visual_branch) {
      visual_branch->collect(out);
      out.push_back(&gate);
    }
    return out;
  }

  std::map<std::string, nn::Parameter<T>*> named_parameters() {
    std::map<std::string, nn::Parameter<T>*> out;
    for (auto* p : parameters()) out[p->name] = p;
    return out;
  }
};

/// Trains the decoder on (embedding, stimulus) pairs with pixel MSE.
/// Deterministic given the config seed.
template <typename T>
DecoderRenderer<T> train_decoder(const std::vector<RendererExample<T>>& examples,
                                 std::size_t side,
                                 const RendererTrainConfig& config,
                                 std::ostream* progress = nullptr) {
  if (examples.empty()) {
    throw ConfigError("train_decoder: no training pairs");
  }
  const std::size_t semantic_dim = examples[0].semantic.size();
  const bool has_visual = examples[0].visual.has_value();
  for (const auto& ex : examples) {
    if (ex.semantic.size() != semantic_dim ||
        ex.visual.has_value() != has_visual ||
        ex.pixels.size() != side * side) {
      throw DimensionError("train_decoder: inconsistent example shapes");
    }
  }
  std::optional<std::size_t> visual_dim;
  if (has_visual) visual_dim = examples[0].visual->size();

  DecoderRenderer<T> renderer = DecoderRenderer<T>::create(
      side, semantic_dim, visual_dim, config.hidden, config.seed);
  auto params = renderer.parameters();
  nn::Adam<T> adam;
  CounterRng root(config.seed);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch = std::min(config.batch_size, examples.size());
  const std::size_t steps_per_epoch = examples.size() / batch;
  const std::size_t total_steps = config.epochs * steps_per_epoch;
  std::size_t global_step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    CounterRng shuffle_rng = root.fork("shuffle").fork(epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step, ++global_step) {
      Tensor<T> sem({batch, semantic_dim});
      Tensor<T> pix({batch, side * side});
      Tensor<T> vis;
      if (has_visual) vis = Tensor<T>({batch, *visual_dim});
      for (std::size_t b = 0; b < batch; ++b) {
        const RendererExample<T>& ex = examples[order[step * batch + b]];
        std::copy(ex.semantic.data(), ex.semantic.data() + semantic_dim,
                  sem.data() + b * semantic_dim);
        std::copy(ex.pixels.data(), ex.pixels.data() + side * side,
                  pix.data() + b * side * side);
        if (has_visual) {
          std::copy(ex.visual->data(), ex.visual->data() + *visual_dim,
                    vis.data() + b * *visual_dim);
        }
      }
      for (auto* p : params) p->zero_grad();
      Tape<T> t;
      NodeId<T> out = renderer.forward(
          t, t.constant(std::move(sem)),
          has_visual ? t.constant(std::move(vis)) : -1);
      NodeId<T> diff = nn::sub(t, out, t.constant(std::move(pix)));
      NodeId<T> loss = nn::mean_all(t, nn::mul(t, diff, diff));
      t.backward(loss);
      epoch_loss += static_cast<double>(t.value(loss)[0]);
      adam.step(params, static_cast<T>(nn::cosine_lr(
                            global_step, config.base_lr, config.min_lr,
                            total_steps)));
    }
    if (progress != nullptr && epoch % 50 == 0) {
      (*progress) << "renderer epoch " << epoch << " loss "
                  << epoch_loss / steps_per_epoch << "\n";
    }
  }
  return renderer;
}

}  // namespace synmind::render
