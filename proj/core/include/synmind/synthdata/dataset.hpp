#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synmind/synthdata/world.hpp"

namespace synmind::data {

struct DatasetManifest {
  int schema_version = 1;
  std::string world_hash;
  WorldConfig config;
  std::vector<std::uint64_t> train_ids;
  std::vector<std::uint64_t> test_ids;  // shared across all subjects
  std::size_t reps_test = 1;
  std::map<std::string, std::string> tensor_paths;  // name -> relative path
  std::vector<std::string> category_names;
};

/// In-memory dataset with consolidated tensors. Voxel tensors are
/// per-subject: train (n_train, Z_k), test (n_test, reps, Z_k).
struct Dataset {
  DatasetManifest manifest;
  nn::Tensor<float> train_pixels;   // (n_train, side, side)
  nn::Tensor<float> train_labels;   // (n_train, M)
  nn::Tensor<float> train_targets;  // (n_train, N_tok, D)
  nn::Tensor<float> train_scenes;   // (n_train, g)
  nn::Tensor<float> test_pixels;
  nn::Tensor<float> test_labels;
  nn::Tensor<float> test_targets;
  nn::Tensor<float> test_scenes;
  std::vector<nn::Tensor<float>> train_voxels;
  std::vector<nn::Tensor<float>> test_voxels;

  std::size_t n_train() const { return manifest.train_ids.size(); }
  std::size_t n_test() const { return manifest.test_ids.size(); }

  /// Test voxels averaged over repetitions for one subject and stimulus.
  std::vector<float> averaged_test_voxels(std::size_t subject,
                                          std::size_t test_index) const;

  /// Object names active in a stimulus row of the given label tensor.
  std::vector<std::string> object_names(const nn::Tensor<float>& labels,
                                        std::size_t row) const;
};

/// Writes manifest.json plus one tensor file per array; returns the manifest.
/// Train/test stimulus ids never overlap; test stimuli exist for every
/// subject with reps_test repetitions each.
DatasetManifest emit_dataset(const GroundTruthWorld& world,
                             std::size_t n_train, std::size_t n_test,
                             std::size_t reps_test,
                             const std::filesystem::path& dir);

/// Loads and validates a dataset directory. Round-trips emit_dataset output
/// bit-exactly.
Dataset load_dataset(const std::filesystem::path& dir);

/// Parses a WorldConfig from a JSON file. Unknown keys are rejected.
WorldConfig world_config_from_json_file(const std::filesystem::path& path);
WorldConfig world_config_from_json_text(const std::string& text);
std::string world_config_to_json_text(const WorldConfig& config);

}  // namespace synmind::data
