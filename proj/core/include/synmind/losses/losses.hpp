#pragma once

#include <vector>

#include "synmind/nncore/ops.hpp"

namespace synmind::losses {

using nn::NodeId;
using nn::Tape;
using nn::Tensor;

/// Training-objective weights. Defaults follow the published configuration.
struct LossWeights {
  double softclip = 0.1;
  double swm = 0.05;
  double denoising = 0.5;
  double prior = 1.0;
  double assist = 0.33;
};

/// One mixing pair: row i blended with row j at coefficient alpha in [0,1].
struct MixPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double alpha = 1.0;
};

constexpr double kProbClamp = 1e-7;

// ---------------------------------------------------------------------------
// Multi-label binary cross-entropy, batch mean. probs: (B, M) in (0, 1)
// after clamping to [kProbClamp, 1 - kProbClamp]; labels: (B, M) in {0, 1}.
// ---------------------------------------------------------------------------
template <typename T>
NodeId<T> bce_multilabel(Tape<T>& t, NodeId<T> probs, const Tensor<T>& labels) {
  const Tensor<T>& p = t.value(probs);
  if (!p.same_shape(labels)) {
    throw synmind::DimensionError("bce_multilabel: probs " + p.shape_string() +
                                  " vs labels " +
                                  Tensor<T>::shape_string(labels.shape()));
  }
  const std::size_t batch = p.rank() == 2 ? p.dim(0) : 1;
  Tensor<T> one_minus_labels(labels.shape());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    one_minus_labels[i] = T(1) - labels[i];
  }
  NodeId<T> y = t.constant(labels);
  NodeId<T> y_inv = t.constant(std::move(one_minus_labels));

  NodeId<T> pc = nn::clamp_op(t, probs, T(kProbClamp), T(1) - T(kProbClamp));
  NodeId<T> log_p = nn::log_op(t, pc);
  NodeId<T> log_q = nn::log_op(
      t, nn::add_scalar(t, nn::neg(t, pc), T(1)));  // log(1 - p)
  NodeId<T> terms = nn::add(t, nn::mul(t, y, log_p), nn::mul(t, y_inv, log_q));
  return nn::scale(t, nn::sum_all(t, terms), T(-1) / static_cast<T>(batch));
}

// ---------------------------------------------------------------------------
// SoftCLIP distillation. Soft targets come from target-target dot-product
// similarities at temperature tau; predictions are scored against the same
// target bank. One-directional, mean over anchors.
// ---------------------------------------------------------------------------

/// Row-softmaxed target-target similarity matrix (B, B), computed off-tape.
template <typename T>
Tensor<T> soft_target_matrix(const Tensor<T>& targets, T tau) {
  if (tau <= T(0)) {
    throw synmind::ConfigError("softclip: temperature must be positive");
  }
  const std::size_t b = targets.dim(0);
  const std::size_t e = targets.dim(1);
  Tensor<T> sims({b, b});
  nn::gemm_nt_acc(targets.data(), targets.data(), sims.data(), b, e, b);
  for (std::size_t r = 0; r < b; ++r) {
    T* row = sims.data() + r * b;
    T mx = row[0] / tau;
    for (std::size_t j = 0; j < b; ++j) {
      row[j] /= tau;
      mx = std::max(mx, row[j]);
    }
    T sum = T(0);
    for (std::size_t j = 0; j < b; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < b; ++j) row[j] /= sum;
  }
  return sims;
}

/// Cross-entropy of prediction-vs-target softmax rows against a fixed soft
/// label matrix: -(1/B) * sum_bj labels[b,j] * log softmax_j(pred_b . t_j / tau).
template <typename T>
NodeId<T> soft_label_contrastive(Tape<T>& t, NodeId<T> preds,
                                 const Tensor<T>& targets,
                                 const Tensor<T>& soft_labels, T tau) {
  const Tensor<T>& p = t.value(preds);
  if (p.rank() != 2 || targets.rank() != 2 || p.dim(1) != targets.dim(1)) {
    throw synmind::DimensionError(
        "contrastive: predictions " + p.shape_string() + " vs targets " +
        Tensor<T>::shape_string(targets.shape()));
  }
  if (tau <= T(0)) {
    throw synmind::ConfigError("contrastive: temperature must be positive");
  }
  const std::size_t batch = p.dim(0);
  NodeId<T> logits = nn::scale(
      t, nn::matmul(t, preds, t.constant(targets), /*transpose_b=*/true),
      T(1) / tau);
  NodeId<T> log_q = nn::row_log_softmax(t, logits);
  NodeId<T> weighted = nn::mul(t, t.constant(soft_labels), log_q);
  return nn::scale(t, nn::sum_all(t, weighted), T(-1) / static_cast<T>(batch));
}

/// SoftCLIP loss: predictions (B, E) distilled toward targets (B, E).
template <typename T>
NodeId<T> softclip(Tape<T>& t, NodeId<T> preds, const Tensor<T>& targets,
                   T tau) {
  return soft_label_contrastive(t, preds, targets,
                                soft_target_matrix(targets, tau), tau);
}

// ---------------------------------------------------------------------------
// MixCo: convex input mixing with correspondingly mixed contrastive labels.
// ---------------------------------------------------------------------------

/// x_mix = alpha * x_i + (1 - alpha) * x_j, plain vectors.
template <typename T>
std::vector<T> mixco_mix(const std::vector<T>& xi, const std::vector<T>& xj,
                         double alpha) {
  if (xi.size() != xj.size()) {
    throw synmind::DimensionError("mixco_mix: vector lengths differ");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw synmind::ConfigError("mixco_mix: alpha outside [0, 1]");
  }
  std::vector<T> out(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    out[k] = static_cast<T>(alpha) * xi[k] +
             (T(1) - static_cast<T>(alpha)) * xj[k];
  }
  return out;
}

/// Rows of x (B, E) mixed per pair list: out[b] = a_b * x[i_b] + (1-a_b) * x[j_b].
template <typename T>
NodeId<T> mix_rows(Tape<T>& t, NodeId<T> x, const std::vector<MixPair>& pairs) {
  const Tensor<T>& xv = t.value(x);
  if (xv.rank() != 2 || pairs.size() != xv.dim(0)) {
    throw synmind::DimensionError("mix_rows: need one pair per row of " +
                                  xv.shape_string());
  }
  const std::size_t e = xv.dim(1);
  Tensor<T> y(xv.shape());
  for (std::size_t b = 0; b < pairs.size(); ++b) {
    const MixPair& mp = pairs[b];
    if (mp.alpha < 0.0 || mp.alpha > 1.0) {
      throw synmind::ConfigError("mix_rows: alpha outside [0, 1]");
    }
    const T a = static_cast<T>(mp.alpha);
    for (std::size_t k = 0; k < e; ++k) {
      y[b * e + k] = a * xv.at(mp.i, k) + (T(1) - a) * xv.at(mp.j, k);
    }
  }
  const bool ng = t.needs_grad(x);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, x, pairs, e](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      Tensor<T>& gx = tt.grad(x);
      for (std::size_t b = 0; b < pairs.size(); ++b) {
        const T a = static_cast<T>(pairs[b].alpha);
        for (std::size_t k = 0; k < e; ++k) {
          gx[pairs[b].i * e + k] += a * g[b * e + k];
          gx[pairs[b].j * e + k] += (T(1) - a) * g[b * e + k];
        }
      }
    });
  }
  return out;
}

/// Hard-label matrix for the mixed contrastive loss: row b puts alpha on
/// column i_b and (1 - alpha) on column j_b.
template <typename T>
Tensor<T> mix_label_matrix(const std::vector<MixPair>& pairs,
                           std::size_t batch) {
  Tensor<T> labels({batch, batch});
  for (std::size_t b = 0; b < pairs.size(); ++b) {
    const T a = static_cast<T>(pairs[b].alpha);
    labels.at(b, pairs[b].i) += a;
    labels.at(b, pairs[b].j) += T(1) - a;
  }
  return labels;
}

/// Mixed-target contrastive loss over encoded mixed rows (B, E).
template <typename T>
NodeId<T> mixco_loss(Tape<T>& t, NodeId<T> encoded_mixed,
                     const Tensor<T>& targets,
                     const std::vector<MixPair>& pairs, T tau) {
  return soft_label_contrastive(
      t, encoded_mixed, targets,
      mix_label_matrix<T>(pairs, targets.dim(0)), tau);
}

/// Unmixed one-hot contrastive loss (InfoNCE) on the same code path.
template <typename T>
NodeId<T> contrastive_hard(Tape<T>& t, NodeId<T> encoded,
                           const Tensor<T>& targets, T tau) {
  const std::size_t batch = targets.dim(0);
  Tensor<T> labels({batch, batch});
  for (std::size_t b = 0; b < batch; ++b) labels.at(b, b) = T(1);
  return soft_label_contrastive(t, encoded, targets, labels, tau);
}

// ---------------------------------------------------------------------------
// Encoder + denoiser MSE: ||t - encoded||^2 + lambda * ||t - denoised||^2,
// summed over elements, mean over batch. Leading dim is the batch.
// ---------------------------------------------------------------------------
template <typename T>
NodeId<T> sse_mse(Tape<T>& t, NodeId<T> encoded, NodeId<T> denoised,
                  const Tensor<T>& targets, T lambda_denoising) {
  const Tensor<T>& ev = t.value(encoded);
  const Tensor<T>& dv = t.value(denoised);
  if (!ev.same_shape(targets) || !dv.same_shape(targets)) {
    throw synmind::DimensionError(
        "sse_mse: shapes " + ev.shape_string() + ", " + dv.shape_string() +
        ", " + Tensor<T>::shape_string(targets.shape()) + " must all match");
  }
  const std::size_t batch = targets.dim(0);
  NodeId<T> tgt = t.constant(targets);
  NodeId<T> d1 = nn::sub(t, tgt, encoded);
  NodeId<T> d2 = nn::sub(t, tgt, denoised);
  NodeId<T> s1 = nn::sum_all(t, nn::mul(t, d1, d1));
  NodeId<T> s2 = nn::sum_all(t, nn::mul(t, d2, d2));
  NodeId<T> total = nn::add(t, s1, nn::scale(t, s2, lambda_denoising));
  return nn::scale(t, total, T(1) / static_cast<T>(batch));
}

// ---------------------------------------------------------------------------
// Weighted visual-encoder objective.
// ---------------------------------------------------------------------------
template <typename T>
NodeId<T> ssv_total(Tape<T>& t, NodeId<T> l_prior, NodeId<T> l_assist,
                    const LossWeights& w) {
  return nn::add(t, nn::scale(t, l_prior, static_cast<T>(w.prior)),
                 nn::scale(t, l_assist, static_cast<T>(w.assist)));
}

inline double ssv_total(double l_prior, double l_assist, const LossWeights& w) {
  return w.prior * l_prior + w.assist * l_assist;
}

/// Mean absolute error, batch mean (elements summed within a sample).
template <typename T>
NodeId<T> l1_loss(Tape<T>& t, NodeId<T> pred, const Tensor<T>& target) {
  const Tensor<T>& pv = t.value(pred);
  if (!pv.same_shape(target)) {
    throw synmind::DimensionError("l1_loss: " + pv.shape_string() + " vs " +
                                  Tensor<T>::shape_string(target.shape()));
  }
  const std::size_t batch = target.dim(0);
  NodeId<T> diff = nn::sub(t, pred, t.constant(target));
  return nn::scale(t, nn::sum_all(t, nn::abs_op(t, diff)),
                   T(1) / static_cast<T>(batch));
}

/// Plain MSE, summed over elements, mean over batch.
template <typename T>
NodeId<T> mse_loss(Tape<T>& t, NodeId<T> pred, const Tensor<T>& target) {
  const Tensor<T>& pv = t.value(pred);
  if (!pv.same_shape(target)) {
    throw synmind::DimensionError("mse_loss: " + pv.shape_string() + " vs " +
                                  Tensor<T>::shape_string(target.shape()));
  }
  const std::size_t batch = target.dim(0);
  NodeId<T> diff = nn::sub(t, pred, t.constant(target));
  return nn::scale(t, nn::sum_all(t, nn::mul(t, diff, diff)),
                   T(1) / static_cast<T>(batch));
}

}  // namespace synmind::losses
