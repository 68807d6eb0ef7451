#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "synmind/losses/losses.hpp"

namespace synmind::pipeline {

enum class Mode { SemanticOnly, Full };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

/// The label a report carries: the complete framework vs. the
/// semantic-only variant.
inline const char* report_label(Mode mode) {
  return mode == Mode::Full ? "SynMind" : "SynMind*";
}

/// Architecture sizes (desk-scale defaults).
struct ModelConfig {
  std::size_t latent_dim = 64;  // shared latent d
  std::size_t prior_layers = 2;
  std::size_t prior_heads = 4;
  std::size_t prior_head_dim = 8;  // heads * head_dim == token_dim
  std::size_t ssv_layers = 8;
  std::size_t ssv_width = 64;
  std::size_t visual_tokens = 16;
  std::size_t visual_token_dim = 32;
  std::size_t vision_prior_layers = 2;
};

struct TrainConfig {
  losses::LossWeights weights;
  double tau = 0.125;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  double base_lr = 1e-3;
  double min_lr = 0.0;
  std::uint64_t seed = 1;
  Mode mode = Mode::Full;
  bool mixco = true;
  std::string granularity = "75";  // cc | 30 | 45 | 60 | 75
  ModelConfig model;
  std::set<std::string> freeze;  // subset of {swm, sse, ssv}

  void validate() const;
  std::string canonical_json() const;
  std::string hash() const;
};

/// Parses a TrainConfig from JSON. Unknown keys are rejected at every level.
TrainConfig train_config_from_json_text(const std::string& text);
TrainConfig train_config_from_json_file(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

}  // namespace synmind::pipeline
