#pragma once

#include <string>
#include <vector>

#include "synmind/common/rng.hpp"
#include "synmind/nncore/ops.hpp"

namespace synmind::nn {

enum class Activation { Gelu, Tanh, Sigmoid, Identity };

template <typename T>
NodeId<T> apply_activation(Tape<T>& t, NodeId<T> x, Activation act) {
  switch (act) {
    case Activation::Gelu: return gelu_op(t, x);
    case Activation::Tanh: return tanh_op(t, x);
    case Activation::Sigmoid: return sigmoid_op(t, x);
    case Activation::Identity: return x;
  }
  return x;
}

/// Gaussian init scaled by 1/sqrt(fan_in).
template <typename T>
Tensor<T> gaussian_init(std::vector<std::size_t> shape, std::size_t fan_in,
                        CounterRng rng, double gain = 1.0) {
  Tensor<T> w(std::move(shape));
  const double scale = gain / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<T>(rng.next_gaussian() * scale);
  }
  return w;
}

template <typename T>
struct Linear {
  Parameter<T> weight;  // (in, out)
  Parameter<T> bias;    // (out)

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out,
         CounterRng rng, double gain = 1.0)
      : weight(name + ".weight",
               gaussian_init<T>({in, out}, in, rng.fork("w"), gain)),
        bias(name + ".bias", Tensor<T>({out})) {}

  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    return add_bias(t, matmul(t, x, t.param(weight)), t.param(bias));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// linear -> activation -> linear with a skip connection. Zero inner weights
/// make it the identity map.
template <typename T>
struct ResidualBlock {
  Linear<T> fc1, fc2;
  Activation activation = Activation::Gelu;

  ResidualBlock() = default;
  ResidualBlock(const std::string& name, std::size_t dim, CounterRng rng,
                Activation act = Activation::Gelu)
      : fc1(name + ".fc1", dim, dim, rng.fork(1)),
        fc2(name + ".fc2", dim, dim, rng.fork(2)),
        activation(act) {}

  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    NodeId<T> h = fc1.forward(t, x);
    h = apply_activation(t, h, activation);
    h = fc2.forward(t, h);
    return add(t, x, h);
  }

  void collect(std::vector<Parameter<T>*>& out) {
    fc1.collect(out);
    fc2.collect(out);
  }
};

template <typename T>
struct LayerNorm {
  Parameter<T> gain;
  Parameter<T> bias;

  LayerNorm() = default;
  LayerNorm(const std::string& name, std::size_t dim)
      : gain(name + ".gain", Tensor<T>::full({dim}, T(1))),
        bias(name + ".bias", Tensor<T>({dim})) {}

  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    return layer_norm(t, x, t.param(gain), t.param(bias));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&gain);
    out.push_back(&bias);
  }
};

/// Plain MLP over the last dimension; activation between layers, none after
/// the final one.
template <typename T>
struct Mlp {
  std::vector<Linear<T>> layers;
  Activation activation = Activation::Gelu;

  Mlp() = default;
  Mlp(const std::string& name, const std::vector<std::size_t>& dims,
      CounterRng rng, Activation act = Activation::Gelu)
      : activation(act) {
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      layers.emplace_back(name + ".fc" + std::to_string(i), dims[i],
                          dims[i + 1], rng.fork(i));
    }
  }

  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i].forward(t, x);
      if (i + 1 < layers.size()) x = apply_activation(t, x, activation);
    }
    return x;
  }

  void collect(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers) l.collect(out);
  }
};

/// Pre-LN multi-head causal self-attention block with a GELU feed-forward.
/// Output token i depends only on input tokens j <= i.
template <typename T>
struct AttentionBlock {
  std::size_t model_dim = 0, heads = 0, head_dim = 0;
  Linear<T> wq, wk, wv, wo;
  LayerNorm<T> ln1, ln2;
  Linear<T> ff1, ff2;

  AttentionBlock() = default;
  AttentionBlock(const std::string& name, std::size_t model_dim_,
                 std::size_t heads_, std::size_t head_dim_, CounterRng rng)
      : model_dim(model_dim_),
        heads(heads_),
        head_dim(head_dim_),
        wq(name + ".wq", model_dim_, heads_ * head_dim_, rng.fork("q")),
        wk(name + ".wk", model_dim_, heads_ * head_dim_, rng.fork("k")),
        wv(name + ".wv", model_dim_, heads_ * head_dim_, rng.fork("v")),
        wo(name + ".wo", heads_ * head_dim_, model_dim_, rng.fork("o")),
        ln1(name + ".ln1", model_dim_),
        ln2(name + ".ln2", model_dim_),
        ff1(name + ".ff1", model_dim_, 4 * model_dim_, rng.fork("f1")),
        ff2(name + ".ff2", 4 * model_dim_, model_dim_, rng.fork("f2")) {}

  /// x: (B, N, model_dim)
  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    const std::size_t n_tok = t.value(x).dim(1);
    NodeId<T> z = ln1.forward(t, x);
    NodeId<T> q = wq.forward(t, z);
    NodeId<T> k = wk.forward(t, z);
    NodeId<T> v = wv.forward(t, z);

    // Strictly-upper entries get a large negative logit before softmax.
    Tensor<T> mask({n_tok, n_tok});
    for (std::size_t i = 0; i < n_tok; ++i) {
      for (std::size_t j = i + 1; j < n_tok; ++j) mask.at(i, j) = T(-1e9);
    }
    NodeId<T> mask_node = t.constant(std::move(mask));

    const T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(head_dim));
    std::vector<NodeId<T>> head_outs;
    head_outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      NodeId<T> qh = slice_last(t, q, h * head_dim, head_dim);
      NodeId<T> kh = slice_last(t, k, h * head_dim, head_dim);
      NodeId<T> vh = slice_last(t, v, h * head_dim, head_dim);
      NodeId<T> scores = scale(t, matmul(t, qh, kh, /*transpose_b=*/true),
                               inv_sqrt_dh);
      scores = add_mat(t, scores, mask_node);
      NodeId<T> attn = row_softmax(t, scores);
      head_outs.push_back(matmul(t, attn, vh));
    }
    NodeId<T> ctx = heads == 1 ? head_outs[0] : concat_last(t, head_outs);
    NodeId<T> h1 = add(t, x, wo.forward(t, ctx));

    NodeId<T> f = ln2.forward(t, h1);
    f = ff2.forward(t, gelu_op(t, ff1.forward(t, f)));
    return add(t, h1, f);
  }

  void collect(std::vector<Parameter<T>*>& out) {
    wq.collect(out);
    wk.collect(out);
    wv.collect(out);
    wo.collect(out);
    ln1.collect(out);
    ln2.collect(out);
    ff1.collect(out);
    ff2.collect(out);
  }
};

/// Stack of causal attention blocks with a final norm and linear head;
/// maps (B, N, D) -> (B, N, D).
template <typename T>
struct TransformerStack {
  std::vector<AttentionBlock<T>> blocks;
  LayerNorm<T> final_norm;
  Linear<T> head;

  TransformerStack() = default;
  TransformerStack(const std::string& name, std::size_t n_layers,
                   std::size_t model_dim, std::size_t heads,
                   std::size_t head_dim, CounterRng rng) {
    for (std::size_t i = 0; i < n_layers; ++i) {
      blocks.emplace_back(name + ".block" + std::to_string(i), model_dim,
                          heads, head_dim, rng.fork(i));
    }
    final_norm = LayerNorm<T>(name + ".final_norm", model_dim);
    head = Linear<T>(name + ".head", model_dim, model_dim, rng.fork("head"));
  }

  NodeId<T> forward(Tape<T>& t, NodeId<T> x) {
    for (auto& b : blocks) x = b.forward(t, x);
    return head.forward(t, final_norm.forward(t, x));
  }

  void collect(std::vector<Parameter<T>*>& out) {
    for (auto& b : blocks) b.collect(out);
    final_norm.collect(out);
    head.collect(out);
  }
};

}  // namespace synmind::nn
