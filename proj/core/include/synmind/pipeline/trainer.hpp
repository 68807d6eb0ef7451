#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "synmind/metrics/extractors.hpp"
#include "synmind/mimevis/mimevis.hpp"
#include "synmind/nncore/optimizer.hpp"
#include "synmind/pipeline/model.hpp"
#include "synmind/synthdata/dataset.hpp"

namespace synmind::pipeline {

struct HistoryRow {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double total = 0.0;
  double swm = 0.0;
  double softclip = 0.0;
  double mse = 0.0;
  std::optional<double> ssv_prior;
  std::optional<double> ssv_assist;
  std::optional<double> ssv;
  double lr = 0.0;
};

/// Writes the per-step loss trace. Full-mode histories carry the three SSV
/// columns; semantic-only histories do not.
void write_history_csv(const std::vector<HistoryRow>& rows, Mode mode,
                       const std::filesystem::path& path);
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

/// Granularity-masked flat semantic targets for one split, aligned by index.
std::vector<nn::Tensor<float>> prepare_semantic_targets(
    const nn::Tensor<float>& split_targets,  // (n, N_tok, D)
    const std::vector<std::uint64_t>& ids,
    const mimevis::CaptionTable& captions, const std::string& granularity);

/// 2x2 average pooling of a (side, side) image, floor semantics.
nn::Tensor<double> pool_pixels(const nn::Tensor<double>& image);

template <typename T>
struct TrainOutput {
  PipelineModel<T> model;
  std::vector<HistoryRow> history;
};

/// End-to-end joint trainer for the four-stage model. Deterministic given
/// the config seed; NaN losses abort with epoch/step diagnostics.
template <typename T>
class Trainer {
 public:
  Trainer(const data::Dataset& dataset, const mimevis::CaptionTable& captions,
          TrainConfig config)
      : dataset_(dataset), config_(std::move(config)) {
    config_.validate();
    const data::WorldConfig& world = dataset_.manifest.config;

    // Granularity-masked teacher token targets for the training split.
    auto masked = prepare_semantic_targets(dataset_.train_targets,
                                           dataset_.manifest.train_ids,
                                           captions, config_.granularity);
    const std::size_t embed = world.token_count * world.token_dim;
    flat_targets_ = nn::Tensor<T>({masked.size(), embed});
    for (std::size_t i = 0; i < masked.size(); ++i) {
      for (std::size_t e = 0; e < embed; ++e) {
        flat_targets_.at(i, e) = static_cast<T>(masked[i][e]);
      }
    }

    if (config_.mode == Mode::Full) {
      prepare_visual_targets();
    } else {
      assist_pixel_dim_ = 1;
      assist_feature_dim_ = 1;
    }
  }

  TrainOutput<T> train(std::ostream* progress = nullptr) {
    const data::WorldConfig& world = dataset_.manifest.config;
    PipelineModel<T> model = PipelineModel<T>::create(
        world, config_, assist_pixel_dim_, assist_feature_dim_);

    if (config_.mode == Mode::Full) {
      const std::size_t visual_dim =
          config_.model.visual_tokens * config_.model.visual_token_dim;
      if (visual_dim != deep_feature_dim_) {
        throw ConfigError(
            "train: visual_tokens * visual_token_dim must equal the deep "
            "feature dimension " + std::to_string(deep_feature_dim_));
      }
    }

    // All (subject, train row) presentations, shuffled per epoch.
    struct Entry {
      std::size_t subject;
      std::size_t row;
    };
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < world.n_subjects; ++k) {
      for (std::size_t i = 0; i < dataset_.n_train(); ++i) {
        entries.push_back({k, i});
      }
    }
    const std::size_t batch = config_.batch_size;
    const std::size_t steps_per_epoch = entries.size() / batch;
    if (steps_per_epoch == 0) {
      throw ConfigError("train: batch_size exceeds the available samples");
    }
    const std::size_t total_steps = config_.epochs * steps_per_epoch;

    auto params = model.trainable_parameters();
    nn::Adam<T> adam;
    std::vector<HistoryRow> history;
    history.reserve(total_steps);
    CounterRng root(config_.seed);
    std::size_t global_step = 0;

    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
      CounterRng shuffle_rng = root.fork("shuffle").fork(epoch);
      for (std::size_t i = entries.size(); i > 1; --i) {
        std::swap(entries[i - 1], entries[shuffle_rng.next_below(i)]);
      }

      for (std::size_t step = 0; step < steps_per_epoch; ++step, ++global_step) {
        std::vector<Entry> chunk(entries.begin() + step * batch,
                                 entries.begin() + (step + 1) * batch);
        std::stable_sort(chunk.begin(), chunk.end(),
                         [](const Entry& a, const Entry& b) {
                           return a.subject < b.subject;
                         });

        const double lr =
            nn::cosine_lr(global_step, config_.base_lr, config_.min_lr,
                          total_steps);
        HistoryRow row;
        row.epoch = epoch;
        row.step = global_step;
        row.lr = lr;
        try {
          for (auto* p : params) p->zero_grad();
          Tape<T> t;
          NodeId<T> loss = build_step(t, model, chunk, root, global_step, row);
          t.backward(loss);
          adam.step(params, static_cast<T>(lr));
        } catch (const TrainingError& e) {
          throw TrainingError("train: aborting at epoch " +
                              std::to_string(epoch) + " step " +
                              std::to_string(global_step) + ": " + e.what());
        }
        if (!std::isfinite(row.total)) {
          throw TrainingError("train: NaN loss at epoch " +
                              std::to_string(epoch) + " step " +
                              std::to_string(global_step));
        }
        history.push_back(row);
      }
      if (progress != nullptr) {
        (*progress) << "epoch " << epoch << " loss "
                    << history.back().total << " lr " << history.back().lr
                    << "\n";
      }
    }
    return {std::move(model), std::move(history)};
  }

  std::size_t assist_pixel_dim() const { return assist_pixel_dim_; }
  std::size_t assist_feature_dim() const { return assist_feature_dim_; }

 private:
  template <typename Entry>
  NodeId<T> build_step(Tape<T>& t, PipelineModel<T>& model,
                       const std::vector<Entry>& chunk, CounterRng& root,
                       std::size_t global_step, HistoryRow& row) {
    const data::WorldConfig& world = dataset_.manifest.config;
    const std::size_t batch = chunk.size();
    const std::size_t embed = world.token_count * world.token_dim;

    // Per-subject voxel sub-batches, concatenated into one latent batch.
    std::vector<NodeId<T>> latent_parts;
    std::size_t pos = 0;
    while (pos < batch) {
      std::size_t end = pos;
      while (end < batch && chunk[end].subject == chunk[pos].subject) ++end;
      const std::size_t z = world.voxel_dims[chunk[pos].subject];
      Tensor<T> voxels({end - pos, z});
      for (std::size_t r = pos; r < end; ++r) {
        for (std::size_t v = 0; v < z; ++v) {
          voxels.at(r - pos, v) =
              static_cast<T>(dataset_.train_voxels[chunk[r].subject].at(
                  chunk[r].row, v));
        }
      }
      latent_parts.push_back(model.swm.forward(
          t, chunk[pos].subject, t.constant(std::move(voxels))));
      pos = end;
    }
    NodeId<T> latent = latent_parts.size() == 1
                           ? latent_parts[0]
                           : nn::concat_rows(t, latent_parts);

    // Gather aligned labels and semantic targets.
    Tensor<T> labels({batch, world.n_categories});
    Tensor<T> targets({batch, embed});
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < world.n_categories; ++c) {
        labels.at(b, c) =
            static_cast<T>(dataset_.train_labels.at(chunk[b].row, c));
      }
      for (std::size_t e = 0; e < embed; ++e) {
        targets.at(b, e) = flat_targets_.at(chunk[b].row, e);
      }
    }

    NodeId<T> l_swm =
        losses::bce_multilabel(t, model.swm.classify(t, latent), labels);

    // Contrastive term: mixed latents against alpha-mixed soft target rows.
    // With MixCo off the pairs are the identity at alpha = 1, which reduces
    // to the plain distillation loss on the same code path.
    std::vector<losses::MixPair> pairs(batch);
    if (config_.mixco) {
      CounterRng mix_rng = root.fork("mixco").fork(global_step);
      const std::size_t shift = 1 + mix_rng.next_below(batch - 1);
      for (std::size_t b = 0; b < batch; ++b) {
        pairs[b] = {b, (b + shift) % batch, mix_rng.next_uniform()};
      }
    } else {
      for (std::size_t b = 0; b < batch; ++b) pairs[b] = {b, (b + 1) % batch, 1.0};
    }
    Tensor<T> soft = losses::soft_target_matrix(targets, static_cast<T>(config_.tau));
    Tensor<T> soft_mixed({batch, batch});
    for (std::size_t b = 0; b < batch; ++b) {
      const T a = static_cast<T>(pairs[b].alpha);
      for (std::size_t j = 0; j < batch; ++j) {
        soft_mixed.at(b, j) = a * soft.at(pairs[b].i, j) +
                              (T(1) - a) * soft.at(pairs[b].j, j);
      }
    }
    NodeId<T> mixed_latent = losses::mix_rows(t, latent, pairs);
    NodeId<T> enc_mixed = model.sse.encode(t, mixed_latent);
    NodeId<T> l_contrastive = losses::soft_label_contrastive(
        t, enc_mixed, targets, soft_mixed, static_cast<T>(config_.tau));

    NodeId<T> enc = model.sse.encode(t, latent);
    NodeId<T> denoised = model.sse.denoise(t, enc);
    NodeId<T> l_mse = losses::sse_mse(t, enc, denoised, targets,
                                      static_cast<T>(config_.weights.denoising));

    NodeId<T> total = nn::add(
        t,
        nn::add(t, nn::scale(t, l_swm, static_cast<T>(config_.weights.swm)),
                nn::scale(t, l_contrastive,
                          static_cast<T>(config_.weights.softclip))),
        l_mse);

    row.swm = static_cast<double>(t.value(l_swm)[0]);
    row.softclip = static_cast<double>(t.value(l_contrastive)[0]);
    row.mse = static_cast<double>(t.value(l_mse)[0]);

    if (model.ssv) {
      Tensor<T> pooled({batch, assist_pixel_dim_});
      Tensor<T> feats_a({batch, assist_feature_dim_});
      Tensor<T> feats_b({batch, deep_feature_dim_});
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t r = chunk[b].row;
        for (std::size_t i = 0; i < assist_pixel_dim_; ++i) {
          pooled.at(b, i) = pooled_pixels_.at(r, i);
        }
        for (std::size_t i = 0; i < assist_feature_dim_; ++i) {
          feats_a.at(b, i) = assist_features_.at(r, i);
        }
        for (std::size_t i = 0; i < deep_feature_dim_; ++i) {
          feats_b.at(b, i) = deep_features_.at(r, i);
        }
      }
      NodeId<T> visual = model.ssv->encode(t, latent);
      NodeId<T> head_pixel = model.ssv->assist_pixel.forward(t, visual);
      NodeId<T> head_feature = model.ssv->assist_feature.forward(t, visual);
      NodeId<T> l_assist =
          nn::add(t, losses::l1_loss(t, head_pixel, pooled),
                  losses::softclip(t, head_feature, feats_a,
                                   static_cast<T>(config_.tau)));
      NodeId<T> refined = model.ssv->refine(t, visual);
      NodeId<T> l_prior = losses::mse_loss(t, refined, feats_b);
      NodeId<T> l_ssv = losses::ssv_total(t, l_prior, l_assist, config_.weights);
      total = nn::add(t, total, l_ssv);

      row.ssv_prior = static_cast<double>(t.value(l_prior)[0]);
      row.ssv_assist = static_cast<double>(t.value(l_assist)[0]);
      row.ssv = static_cast<double>(t.value(l_ssv)[0]);
    }

    row.total = static_cast<double>(t.value(total)[0]);
    return total;
  }

  void prepare_visual_targets() {
    const data::WorldConfig& world = dataset_.manifest.config;
    const std::size_t n = dataset_.n_train();
    const std::size_t side = world.image_side;

    metrics::FeatureExtractor assist_extractor(metrics::ExtractorKind::DeepA);
    metrics::FeatureExtractor deep_extractor(metrics::ExtractorKind::DeepB);
    assist_feature_dim_ = assist_extractor.output_dim();
    deep_feature_dim_ = deep_extractor.output_dim();

    nn::Tensor<double> first_image({side, side});
    for (std::size_t p = 0; p < side * side; ++p) {
      first_image[p] = dataset_.train_pixels[p];
    }
    assist_pixel_dim_ = pool_pixels(first_image).size();

    pooled_pixels_ = nn::Tensor<T>({n, assist_pixel_dim_});
    assist_features_ = nn::Tensor<T>({n, assist_feature_dim_});
    deep_features_ = nn::Tensor<T>({n, deep_feature_dim_});
    for (std::size_t i = 0; i < n; ++i) {
      nn::Tensor<double> image({side, side});
      for (std::size_t p = 0; p < side * side; ++p) {
        image[p] = dataset_.train_pixels[i * side * side + p];
      }
      const nn::Tensor<double> pooled = pool_pixels(image);
      for (std::size_t p = 0; p < pooled.size(); ++p) {
        pooled_pixels_.at(i, p) = static_cast<T>(pooled[p]);
      }
      const auto fa = assist_extractor.features(image);
      for (std::size_t p = 0; p < fa.size(); ++p) {
        assist_features_.at(i, p) = static_cast<T>(fa[p]);
      }
      const auto fb = deep_extractor.features(image);
      for (std::size_t p = 0; p < fb.size(); ++p) {
        deep_features_.at(i, p) = static_cast<T>(fb[p]);
      }
    }
  }

  const data::Dataset& dataset_;
  TrainConfig config_;
  nn::Tensor<T> flat_targets_;      // (n_train, N_tok * D), masked
  nn::Tensor<T> pooled_pixels_;     // (n_train, pool_dim)
  nn::Tensor<T> assist_features_;   // (n_train, deep-A dim)
  nn::Tensor<T> deep_features_;     // (n_train, deep-B dim)
  std::size_t assist_pixel_dim_ = 1;
  std::size_t assist_feature_dim_ = 1;
  std::size_t deep_feature_dim_ = 1;
};

}  // namespace synmind::pipeline
