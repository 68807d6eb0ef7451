#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace synmind::data {

struct WorldConfig {
  std::size_t n_subjects = 4;
  std::vector<std::size_t> voxel_dims = {120, 140, 100, 160};  // Z_k
  std::size_t scene_dim = 24;     // g
  std::size_t n_categories = 16;  // M
  std::size_t image_side = 16;
  std::size_t token_count = 8;  // N_tok
  std::size_t token_dim = 32;   // D
  double noise_sigma = 0.05;
  std::uint64_t seed = 7;

  void validate() const;

  /// Scene dims that carry object/semantic content vs. appearance-only dims.
  /// Labels and semantic targets read only the semantic block; pixels read
  /// both, so a semantics-only decoder has a structural reconstruction gap.
  std::size_t appearance_dims() const;
  std::size_t semantic_dims() const { return scene_dim - appearance_dims(); }

  std::string canonical_json() const;
  std::string hash() const;
};

/// Fixed generative maps tying scenes to voxels, labels, teacher tokens and
/// pixels. Every tensor is a pure function of the config (including seed).
struct GroundTruthWorld {
  WorldConfig config;
  std::vector<nn::Tensor<double>> mixing;  // A_k: (Z_k, g)
  nn::Tensor<double> sem_weight;           // (N_tok * D, g), affine + tanh
  nn::Tensor<double> sem_bias;             // (N_tok * D)
  nn::Tensor<double> img_weight;           // (side * side, g), affine + clamp
  nn::Tensor<double> img_bias;             // (side * side)
  nn::Tensor<double> label_weight;         // (M, g)
  nn::Tensor<double> label_threshold;      // (M), 20% expected prevalence
  std::vector<std::string> category_names;

  std::vector<double> scene_code(std::uint64_t scene_seed) const;
  std::vector<double> clean_voxels(std::size_t subject,
                                   const std::vector<double>& scene) const;
};

struct Stimulus {
  std::uint64_t id = 0;
  nn::Tensor<float> pixels;           // (side, side) in [0, 1]
  std::vector<float> labels;          // multi-hot, length M, >= 1 active
  nn::Tensor<float> semantic_target;  // (N_tok, D), entries in (-1, 1)
  std::vector<float> scene;           // ground-truth scene code, length g
};

constexpr std::uint32_t kAveragedRepetition = 0xFFFFFFFFu;

struct FmriSample {
  std::size_t subject = 0;
  std::uint64_t stimulus_id = 0;
  std::vector<float> voxels;  // length Z_k
  std::uint32_t repetition = 0;
};

GroundTruthWorld generate_world(const WorldConfig& config);

Stimulus synthesize_stimulus(const GroundTruthWorld& world,
                             std::uint64_t scene_seed);

/// One FmriSample per subject for the given repetition index:
/// x = A_k * s + eps, with eps drawn from a stream keyed by
/// (scene_seed, subject, repetition).
std::pair<Stimulus, std::vector<FmriSample>> synthesize_sample(
    const GroundTruthWorld& world, std::uint64_t scene_seed,
    std::uint32_t repetition);

/// Element-wise mean of repeated presentations of one stimulus to one
/// subject; repetition index becomes kAveragedRepetition.
FmriSample average_test_repetitions(const std::vector<FmriSample>& samples);

}  // namespace synmind::data
