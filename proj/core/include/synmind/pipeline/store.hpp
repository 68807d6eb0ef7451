#pragma once

#include "synmind/pipeline/checkpoint.hpp"
#include "synmind/pipeline/model.hpp"
#include "synmind/renderer/decoder.hpp"
#include "synmind/synthdata/dataset.hpp"

namespace synmind::pipeline {

constexpr const char* kPipelineManifest = "checkpoint.json";
constexpr const char* kRendererManifest = "renderer.json";

template <typename T>
void save_pipeline(PipelineModel<T>& model, const std::filesystem::path& dir,
                   std::size_t assist_pixel_dim, std::size_t assist_feature_dim) {
  nlohmann::json extra;
  extra["kind"] = "pipeline";
  extra["mode"] = mode_name(model.config.mode);
  extra["label"] = report_label(model.config.mode);
  extra["world"] = nlohmann::json::parse(world_config_to_json_text(model.world));
  extra["train"] = nlohmann::json::parse(model.config.canonical_json());
  extra["config_hash"] = model.config.hash();
  extra["assist_pixel_dim"] = assist_pixel_dim;
  extra["assist_feature_dim"] = assist_feature_dim;
  save_parameters<T>(dir, model.named_parameters(), std::move(extra),
                     kPipelineManifest);
}

/// Reads the stored precision tag ("f32" or "f64") without loading tensors.
inline std::string checkpoint_precision(const std::filesystem::path& dir,
                                        const std::string& manifest_name) {
  return read_checkpoint_manifest(dir, manifest_name)
      .at("precision")
      .get<std::string>();
}

template <typename T>
PipelineModel<T> load_pipeline(const std::filesystem::path& dir) {
  nlohmann::json manifest = read_checkpoint_manifest(dir, kPipelineManifest);
  if (manifest.at("kind").get<std::string>() != "pipeline") {
    throw FormatError("checkpoint: " + dir.string() + " is not a pipeline checkpoint");
  }
  data::WorldConfig world =
      data::world_config_from_json_text(manifest.at("world").dump());
  TrainConfig config = train_config_from_json_text(manifest.at("train").dump());
  PipelineModel<T> model = PipelineModel<T>::create(
      world, config, manifest.at("assist_pixel_dim").get<std::size_t>(),
      manifest.at("assist_feature_dim").get<std::size_t>());
  load_parameters<T>(dir, manifest, model.named_parameters());
  return model;
}

template <typename T>
void save_renderer(render::DecoderRenderer<T>& renderer,
                   const std::filesystem::path& dir, std::size_t hidden,
                   std::uint64_t seed) {
  nlohmann::json extra;
  extra["kind"] = "renderer";
  extra["side"] = renderer.side;
  extra["semantic_dim"] = renderer.semantic_dim;
  if (renderer.visual_dim) {
    extra["visual_dim"] = *renderer.visual_dim;
  }
  extra["hidden"] = hidden;
  extra["seed"] = seed;
  save_parameters<T>(dir, renderer.named_parameters(), std::move(extra),
                     kRendererManifest);
}

template <typename T>
render::DecoderRenderer<T> load_renderer(const std::filesystem::path& dir) {
  nlohmann::json manifest = read_checkpoint_manifest(dir, kRendererManifest);
  if (manifest.at("kind").get<std::string>() != "renderer") {
    throw FormatError("checkpoint: " + dir.string() + " is not a renderer checkpoint");
  }
  std::optional<std::size_t> visual_dim;
  if (manifest.contains("visual_dim")) {
    visual_dim = manifest.at("visual_dim").get<std::size_t>();
  }
  render::DecoderRenderer<T> renderer = render::DecoderRenderer<T>::create(
      manifest.at("side").get<std::size_t>(),
      manifest.at("semantic_dim").get<std::size_t>(), visual_dim,
      manifest.at("hidden").get<std::size_t>(),
      manifest.at("seed").get<std::uint64_t>());
  load_parameters<T>(dir, manifest, renderer.named_parameters());
  return renderer;
}

}  // namespace synmind::pipeline
