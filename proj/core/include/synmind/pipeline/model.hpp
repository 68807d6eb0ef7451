#pragma once

#include <map>
#include <optional>

#include "synmind/nncore/layers.hpp"
#include "synmind/pipeline/config.hpp"
#include "synmind/synthdata/world.hpp"

namespace synmind::pipeline {

using nn::NodeId;
using nn::Tape;
using nn::Tensor;

/// Subject-Wise Mapper: one linear map per subject into the shared latent
/// space, plus a shared multi-label classifier head.
template <typename T>
struct SwmModel {
  std::vector<nn::Linear<T>> subject_maps;  // Z_k -> d
  nn::Linear<T> classifier;                 // d -> M

  SwmModel() = default;
  SwmModel(const data::WorldConfig& world, const ModelConfig& model,
           CounterRng rng) {
    for (std::size_t k = 0; k < world.n_subjects; ++k) {
      subject_maps.emplace_back("swm.subject" + std::to_string(k),
                                world.voxel_dims[k], model.latent_dim,
                                rng.fork(k));
    }
    classifier = nn::Linear<T>("swm.classifier", model.latent_dim,
                               world.n_categories, rng.fork("classifier"));
  }

  /// voxels: (B, Z_k) for one subject.
  NodeId<T> forward(Tape<T>& t, std::size_t subject, NodeId<T> voxels) {
    if (subject >= subject_maps.size()) {
      throw MissingInputError("swm: unknown subject " + std::to_string(subject));
    }
    return subject_maps[subject].forward(t, voxels);
  }

  /// Multi-label probabilities from the shared latent.
  NodeId<T> classify(Tape<T>& t, NodeId<T> latent) {
    return nn::sigmoid_op(t, classifier.forward(t, latent));
  }

  void collect(std::vector<nn::Parameter<T>*>& out) {
    for (auto& m : subject_maps) m.collect(out);
    classifier.collect(out);
  }
};

/// Subject-Shared Semantic Encoder: three residual blocks at width d, a
/// projection to the token grid, and a causal-transformer denoising prior.
template <typename T>
struct SseModel {
  nn::ResidualBlock<T> res1, res2, res3;
  nn::Linear<T> out;
  nn::TransformerStack<T> prior;
  std::size_t token_count = 0, token_dim = 0;

  SseModel() = default;
  SseModel(const data::WorldConfig& world, const ModelConfig& model,
           CounterRng rng)
      : res1("sse.res1", model.latent_dim, rng.fork(1)),
        res2("sse.res2", model.latent_dim, rng.fork(2)),
        res3("sse.res3", model.latent_dim, rng.fork(3)),
        out("sse.out", model.latent_dim, world.token_count * world.token_dim,
            rng.fork("out")),
        prior("sse.prior", model.prior_layers, world.token_dim,
              model.prior_heads, model.prior_head_dim, rng.fork("prior")),
        token_count(world.token_count),
        token_dim(world.token_dim) {
    if (model.prior_heads * model.prior_head_dim != world.token_dim) {
      throw ConfigError("sse prior: heads * head_dim must equal token_dim");
    }
  }

  /// latent (B, d) -> flat token embedding (B, N*D).
  NodeId<T> encode(Tape<T>& t, NodeId<T> latent) {
    NodeId<T> h = res1.forward(t, latent);
    h = res2.forward(t, h);
    h = res3.forward(t, h);
    return out.forward(t, h);
  }

  /// flat (B, N*D) -> denoised flat (B, N*D) through the prior.
  NodeId<T> denoise(Tape<T>& t, NodeId<T> encoded_flat) {
    const std::size_t batch = t.value(encoded_flat).dim(0);
    NodeId<T> grid = nn::reshape(t, encoded_flat, {batch, token_count, token_dim});
    NodeId<T> refined = prior.forward(t, grid);
    return nn::reshape(t, refined, {batch, token_count * token_dim});
  }

  void collect(std::vector<nn::Parameter<T>*>& out_params) {
    res1.collect(out_params);
    res2.collect(out_params);
    res3.collect(out_params);
    out.collect(out_params);
    prior.collect(out_params);
  }
};

/// Subject-Shared Visual Encoder: deep MLP to the visual latent, the two
/// VisionAssist heads (training only), and the VisionPrior transformer.
template <typename T>
struct SsvModel {
  nn::Mlp<T> encoder;
  nn::Linear<T> assist_pixel;    // -> pooled-pixel latent
  nn::Linear<T> assist_feature;  // -> stand-in deep-feature embedding
  nn::TransformerStack<T> prior;
  std::size_t visual_tokens = 0, visual_token_dim = 0;

  SsvModel() = default;
  SsvModel(const data::WorldConfig& world, const ModelConfig& model,
           std::size_t assist_pixel_dim, std::size_t assist_feature_dim,
           CounterRng rng)
      : visual_tokens(model.visual_tokens),
        visual_token_dim(model.visual_token_dim) {
    const std::size_t visual_dim = model.visual_tokens * model.visual_token_dim;
    // ssv_layers fully connected layers in total.
    std::vector<std::size_t> dims;
    dims.push_back(model.latent_dim);
    for (std::size_t i = 0; i + 1 < model.ssv_layers; ++i) {
      dims.push_back(model.ssv_width);
    }
    dims.push_back(visual_dim);
    encoder = nn::Mlp<T>("ssv.encoder", dims, rng.fork("enc"));
    assist_pixel = nn::Linear<T>("ssv.assist_pixel", visual_dim,
                                 assist_pixel_dim, rng.fork("ap"));
    assist_feature = nn::Linear<T>("ssv.assist_feature", visual_dim,
                                   assist_feature_dim, rng.fork("af"));
    prior = nn::TransformerStack<T>("ssv.prior", model.vision_prior_layers,
                                    model.visual_token_dim,
                                    model.prior_heads, model.prior_head_dim,
                                    rng.fork("prior"));
    if (model.prior_heads * model.prior_head_dim != model.visual_token_dim) {
      throw ConfigError("ssv prior: heads * head_dim must equal visual_token_dim");
    }
    (void)world;
  }

  NodeId<T> encode(Tape<T>& t, NodeId<T> latent) {
    return encoder.forward(t, latent);
  }

  NodeId<T> refine(Tape<T>& t, NodeId<T> visual_flat) {
    const std::size_t batch = t.value(visual_flat).dim(0);
    NodeId<T> grid =
        nn::reshape(t, visual_flat, {batch, visual_tokens, visual_token_dim});
    NodeId<T> refined = prior.forward(t, grid);
    return nn::reshape(t, refined, {batch, visual_tokens * visual_token_dim});
  }

  void collect(std::vector<nn::Parameter<T>*>& out) {
    encoder.collect(out);
    assist_pixel.collect(out);
    assist_feature.collect(out);
    prior.collect(out);
  }
};

template <typename T>
struct InferResult {
  Tensor<T> semantic;                 // (N_tok, D)
  std::optional<Tensor<T>> visual;    // (visual_tokens, visual_token_dim)
};

/// The assembled four-stage model (renderer lives separately).
template <typename T>
struct PipelineModel {
  data::WorldConfig world;
  TrainConfig config;
  SwmModel<T> swm;
  SseModel<T> sse;
  std::optional<SsvModel<T>> ssv;

  static PipelineModel create(const data::WorldConfig& world,
                              const TrainConfig& config,
                              std::size_t assist_pixel_dim,
                              std::size_t assist_feature_dim) {
    config.validate();
    world.validate();
    PipelineModel m;
    m.world = world;
    m.config = config;
    CounterRng rng(config.seed);
    m.swm = SwmModel<T>(world, config.model, rng.fork("swm"));
    m.sse = SseModel<T>(world, config.model, rng.fork("sse"));
    if (config.mode == Mode::Full) {
      m.ssv.emplace(world, config.model, assist_pixel_dim, assist_feature_dim,
                    rng.fork("ssv"));
    }
    return m;
  }

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    swm.collect(out);
    sse.collect(out);
    if (ssv) ssv->collect(out);
    return out;
  }

  std::vector<nn::Parameter<T>*> trainable_parameters() {
    std::vector<nn::Parameter<T>*> out;
    if (!config.freeze.count("swm")) swm.collect(out);
    if (!config.freeze.count("sse")) sse.collect(out);
    if (ssv && !config.freeze.count("ssv")) ssv->collect(out);
    return out;
  }

  std::map<std::string, nn::Parameter<T>*> named_parameters() {
    std::map<std::string, nn::Parameter<T>*> out;
    for (auto* p : parameters()) out[p->name] = p;
    return out;
  }

  /// Inference on one voxel vector. The visual embedding is present iff the
  /// model was trained in full mode.
  InferResult<T> infer(const std::vector<float>& voxels, std::size_t subject) {
    if (subject >= world.n_subjects) {
      throw MissingInputError("infer: unknown subject " + std::to_string(subject));
    }
    if (voxels.size() != world.voxel_dims[subject]) {
      throw DimensionError("infer: voxel length " + std::to_string(voxels.size()) +
                           " does not match Z_k = " +
                           std::to_string(world.voxel_dims[subject]));
    }
    Tensor<T> x({1, voxels.size()});
    for (std::size_t i = 0; i < voxels.size(); ++i) x[i] = static_cast<T>(voxels[i]);

    Tape<T> t;
    NodeId<T> latent = swm.forward(t, subject, t.constant(std::move(x)));
    NodeId<T> enc = sse.encode(t, latent);
    NodeId<T> denoised = sse.denoise(t, enc);

    InferResult<T> result;
    result.semantic = t.value(denoised).reshaped({sse.token_count, sse.token_dim});
    if (ssv) {
      NodeId<T> visual = ssv->encode(t, latent);
      NodeId<T> refined = ssv->refine(t, visual);
      result.visual = t.value(refined).reshaped(
          {ssv->visual_tokens, ssv->visual_token_dim});
    }
    return result;
  }
};

/// Tokens spanned by a caption at the desk token budget: captions at the
/// largest budget (75 words) fill the whole grid, shorter ones fill
/// proportionally fewer leading tokens. Trailing tokens are zero-padded.
inline std::size_t active_tokens(std::size_t caption_words,
                                 std::size_t token_count) {
  if (caption_words == 0) return 1;
  const std::size_t n = (caption_words * token_count + 74) / 75;
  return std::min(std::max<std::size_t>(n, 1), token_count);
}

/// Zeroes target tokens beyond the caption-derived content.
inline nn::Tensor<float> masked_target(const nn::Tensor<float>& full,
                                       std::size_t n_active) {
  nn::Tensor<float> out = full;  // (N_tok, D)
  for (std::size_t tok = n_active; tok < out.dim(0); ++tok) {
    for (std::size_t d = 0; d < out.dim(1); ++d) out.at(tok, d) = 0.0f;
  }
  return out;
}

}  // namespace synmind::pipeline
