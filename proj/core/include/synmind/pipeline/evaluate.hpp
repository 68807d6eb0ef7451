#pragma once

#include "synmind/metrics/evaluate.hpp"
#include "synmind/metrics/identification.hpp"
#include "synmind/pipeline/trainer.hpp"
#include "synmind/renderer/decoder.hpp"

namespace synmind::pipeline {

template <typename T>
struct BatchInferResult {
  Tensor<T> semantic;               // (B, N_tok * D)
  std::optional<Tensor<T>> visual;  // (B, visual_dim)
};

/// Forward pass without gradients over a voxel batch of one subject.
template <typename T>
BatchInferResult<T> batch_infer(PipelineModel<T>& model,
                                const Tensor<T>& voxels, std::size_t subject) {
  Tape<T> t;
  NodeId<T> latent = model.swm.forward(t, subject, t.constant(voxels));
  NodeId<T> denoised = model.sse.denoise(t, model.sse.encode(t, latent));
  BatchInferResult<T> out;
  out.semantic = t.value(denoised);
  if (model.ssv) {
    NodeId<T> refined = model.ssv->refine(t, model.ssv->encode(t, latent));
    out.visual = t.value(refined);
  }
  return out;
}

/// Builds renderer training pairs from the training split: one example per
/// (subject, stimulus) presentation. With teacher forcing the ground-truth
/// targets stand in for the inferred embeddings (capacity-ceiling runs).
template <typename T>
std::vector<render::RendererExample<T>> build_renderer_examples(
    PipelineModel<T>& model, const data::Dataset& dataset,
    const mimevis::CaptionTable& captions, bool teacher_forcing) {
  const data::WorldConfig& world = dataset.manifest.config;
  const std::size_t embed = world.token_count * world.token_dim;
  const std::size_t n = dataset.n_train();
  const std::size_t px = world.image_side * world.image_side;

  auto masked = prepare_semantic_targets(dataset.train_targets,
                                         dataset.manifest.train_ids, captions,
                                         model.config.granularity);

  // Teacher-forced visual embeddings are the stand-in deep features of the
  // stimulus (the VisionPrior training target).
  std::optional<metrics::FeatureExtractor> deep;
  if (model.ssv) deep.emplace(metrics::ExtractorKind::DeepB);

  std::vector<render::RendererExample<T>> examples;
  examples.reserve(n * world.n_subjects);

  for (std::size_t k = 0; k < world.n_subjects; ++k) {
    const std::size_t z = world.voxel_dims[k];
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < n; start += chunk) {
      const std::size_t len = std::min(chunk, n - start);
      BatchInferResult<T> inferred;
      if (!teacher_forcing) {
        Tensor<T> voxels({len, z});
        for (std::size_t r = 0; r < len; ++r) {
          for (std::size_t v = 0; v < z; ++v) {
            voxels.at(r, v) =
                static_cast<T>(dataset.train_voxels[k].at(start + r, v));
          }
        }
        inferred = batch_infer(model, voxels, k);
      }
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t row = start + r;
        render::RendererExample<T> ex;
        ex.semantic = Tensor<T>({embed});
        if (teacher_forcing) {
          for (std::size_t e = 0; e < embed; ++e) {
            ex.semantic[e] = static_cast<T>(masked[row][e]);
          }
        } else {
          for (std::size_t e = 0; e < embed; ++e) {
            ex.semantic[e] = inferred.semantic.at(r, e);
          }
        }
        if (model.ssv) {
          const std::size_t vdim =
              model.ssv->visual_tokens * model.ssv->visual_token_dim;
          Tensor<T> vis({vdim});
          if (teacher_forcing) {
            nn::Tensor<double> image({world.image_side, world.image_side});
            for (std::size_t p = 0; p < px; ++p) {
              image[p] = dataset.train_pixels[row * px + p];
            }
            const auto f = deep->features(image);
            for (std::size_t e = 0; e < vdim; ++e) {
              vis[e] = static_cast<T>(f[e]);
            }
          } else {
            for (std::size_t e = 0; e < vdim; ++e) {
              vis[e] = inferred.visual->at(r, e);
            }
          }
          ex.visual = std::move(vis);
        }
        ex.pixels = Tensor<T>({px});
        for (std::size_t p = 0; p < px; ++p) {
          ex.pixels[p] = static_cast<T>(dataset.train_pixels[row * px + p]);
        }
        examples.push_back(std::move(ex));
      }
    }
  }
  return examples;
}

template <typename T>
struct EvalArtifacts {
  metrics::MetricReport report;
  std::vector<std::uint64_t> test_ids;
  std::vector<nn::Tensor<double>> originals;
  // recons[subject][test_index]
  std::vector<std::vector<nn::Tensor<double>>> recons;
  // semantic embedding grids per subject, plus the masked target grids
  std::vector<std::vector<nn::Tensor<double>>> semantic_grids;
  std::vector<nn::Tensor<double>> target_grids;
};

/// Full evaluation: averaged test repetitions through the model and
/// renderer, the eight-column battery per subject, plus the averaged row.
template <typename T>
EvalArtifacts<T> evaluate_model(PipelineModel<T>& model,
                                render::DecoderRenderer<T>& renderer,
                                const data::Dataset& dataset,
                                const mimevis::CaptionTable& captions,
                                const metrics::ExtractorBank& bank) {
  const data::WorldConfig& world = dataset.manifest.config;
  const std::size_t n = dataset.n_test();
  const std::size_t px = world.image_side * world.image_side;
  const std::size_t embed = world.token_count * world.token_dim;

  EvalArtifacts<T> artifacts;
  artifacts.test_ids = dataset.manifest.test_ids;

  for (std::size_t i = 0; i < n; ++i) {
    nn::Tensor<double> image({world.image_side, world.image_side});
    for (std::size_t p = 0; p < px; ++p) {
      image[p] = dataset.test_pixels[i * px + p];
    }
    artifacts.originals.push_back(std::move(image));
  }
  auto masked = prepare_semantic_targets(dataset.test_targets,
                                         dataset.manifest.test_ids, captions,
                                         model.config.granularity);
  for (std::size_t i = 0; i < n; ++i) {
    artifacts.target_grids.push_back(masked[i].template cast<double>());
  }

  metrics::MetricRow sum_row;
  for (std::size_t k = 0; k < world.n_subjects; ++k) {
    const std::size_t z = world.voxel_dims[k];
    Tensor<T> voxels({n, z});
    for (std::size_t i = 0; i < n; ++i) {
      const auto averaged = dataset.averaged_test_voxels(k, i);
      for (std::size_t v = 0; v < z; ++v) {
        voxels.at(i, v) = static_cast<T>(averaged[v]);
      }
    }
    BatchInferResult<T> inferred = batch_infer(model, voxels, k);

    std::vector<nn::Tensor<double>> recons;
    std::vector<nn::Tensor<double>> grids;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor<T> sem({embed});
      for (std::size_t e = 0; e < embed; ++e) sem[e] = inferred.semantic.at(i, e);
      grids.push_back(
          sem.reshaped({world.token_count, world.token_dim})
              .template cast<double>());
      Tensor<T> rendered;
      if (model.ssv) {
        const std::size_t vdim =
            model.ssv->visual_tokens * model.ssv->visual_token_dim;
        Tensor<T> vis({vdim});
        for (std::size_t e = 0; e < vdim; ++e) vis[e] = inferred.visual->at(i, e);
        rendered = renderer.render(sem, &vis);
      } else {
        rendered = renderer.render(sem, nullptr);
      }
      recons.push_back(rendered.template cast<double>());
    }

    metrics::MetricRow row =
        metrics::evaluate_images(recons, artifacts.originals, bank);
    artifacts.report.per_subject["subject" + std::to_string(k)] = row;
    sum_row.pixcorr += row.pixcorr;
    sum_row.ssim += row.ssim;
    sum_row.twoway_shallow2 += row.twoway_shallow2;
    sum_row.twoway_shallow5 += row.twoway_shallow5;
    sum_row.twoway_deep_a += row.twoway_deep_a;
    sum_row.twoway_deep_b += row.twoway_deep_b;
    sum_row.dist_a += row.dist_a;
    sum_row.dist_b += row.dist_b;

    artifacts.recons.push_back(std::move(recons));
    artifacts.semantic_grids.push_back(std::move(grids));
  }

  const double inv = 1.0 / static_cast<double>(world.n_subjects);
  sum_row.pixcorr *= inv;
  sum_row.ssim *= inv;
  sum_row.twoway_shallow2 *= inv;
  sum_row.twoway_shallow5 *= inv;
  sum_row.twoway_deep_a *= inv;
  sum_row.twoway_deep_b *= inv;
  sum_row.dist_a *= inv;
  sum_row.dist_b *= inv;
  artifacts.report.averaged = sum_row;
  artifacts.report.label = report_label(model.config.mode);
  artifacts.report.n_samples = n;
  artifacts.report.config_hash = model.config.hash();
  return artifacts;
}

/// Two-way identification of inferred semantic embeddings against the
/// granularity-masked targets, averaged across subjects. Runs on averaged
/// test repetitions.
template <typename T>
double semantic_two_way(PipelineModel<T>& model, const data::Dataset& dataset,
                        const mimevis::CaptionTable& captions,
                        const metrics::FeatureExtractor& extractor) {
  const data::WorldConfig& world = dataset.manifest.config;
  const std::size_t n = dataset.n_test();
  const std::size_t embed = world.token_count * world.token_dim;

  auto masked = prepare_semantic_targets(dataset.test_targets,
                                         dataset.manifest.test_ids, captions,
                                         model.config.granularity);
  std::vector<nn::Tensor<double>> truths;
  for (std::size_t i = 0; i < n; ++i) {
    truths.push_back(masked[i].template cast<double>());
  }

  double total = 0.0;
  for (std::size_t k = 0; k < world.n_subjects; ++k) {
    const std::size_t z = world.voxel_dims[k];
    Tensor<T> voxels({n, z});
    for (std::size_t i = 0; i < n; ++i) {
      const auto averaged = dataset.averaged_test_voxels(k, i);
      for (std::size_t v = 0; v < z; ++v) voxels.at(i, v) = static_cast<T>(averaged[v]);
    }
    BatchInferResult<T> inferred = batch_infer(model, voxels, k);
    std::vector<nn::Tensor<double>> grids;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor<T> sem({embed});
      for (std::size_t e = 0; e < embed; ++e) sem[e] = inferred.semantic.at(i, e);
      grids.push_back(sem.reshaped({world.token_count, world.token_dim})
                          .template cast<double>());
    }
    total += metrics::two_way_identification(extractor, grids, truths);
  }
  return total / static_cast<double>(world.n_subjects);
}

}  // namespace synmind::pipeline
