#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/io/tensor_file.hpp"
#include "synmind/nncore/tape.hpp"

namespace synmind::pipeline {

namespace detail {

inline std::string param_file_name(const std::string& param_name) {
  std::string s = param_name;
  for (char& c : s) {
    if (c == '.') c = '_';
  }
  return s + ".bin";
}

}  // namespace detail

template <typename T>
inline const char* precision_name() {
  return std::is_same_v<T, float> ? "f32" : "f64";
}

/// Writes one tensor file per parameter under dir/tensors plus a manifest
/// JSON carrying `extra` (configs, mode, hashes) and the file map.
template <typename T>
void save_parameters(const std::filesystem::path& dir,
                     const std::map<std::string, nn::Parameter<T>*>& params,
                     nlohmann::json extra, const std::string& manifest_name) {
  std::filesystem::create_directories(dir / "tensors");
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, p] : params) {
    const std::string file = detail::param_file_name(name);
    io::write_tensor<T>(dir / "tensors" / file, p->value);
    files[name] = "tensors/" + file;
  }
  extra["schema_version"] = 1;
  extra["precision"] = precision_name<T>();
  extra["tensors"] = files;
  std::ofstream out(dir / manifest_name, std::ios::trunc);
  if (!out) {
    throw FormatError("checkpoint: cannot write " +
                      (dir / manifest_name).string());
  }
  out << extra.dump(2) << "\n";
}

inline nlohmann::json read_checkpoint_manifest(
    const std::filesystem::path& dir, const std::string& manifest_name) {
  std::ifstream in(dir / manifest_name);
  if (!in) {
    throw MissingInputError("checkpoint: cannot open " +
                            (dir / manifest_name).string());
  }
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  }
}

/// Fills existing model parameters from a checkpoint directory. Every named
/// parameter must be present with a matching shape.
template <typename T>
void load_parameters(const std::filesystem::path& dir,
                     const nlohmann::json& manifest,
                     const std::map<std::string, nn::Parameter<T>*>& params) {
  const std::string expected = precision_name<T>();
  const std::string actual = manifest.at("precision").get<std::string>();
  if (actual != expected) {
    throw FormatError("checkpoint: precision mismatch, file is " + actual +
                      " but " + expected + " was requested");
  }
  const auto& files = manifest.at("tensors");
  for (const auto& [name, p] : params) {
    if (!files.contains(name)) {
      throw FormatError("checkpoint: missing tensor for parameter '" + name + "'");
    }
    nn::Tensor<T> loaded =
        io::read_tensor<T>(dir / files.at(name).template get<std::string>());
    if (loaded.shape() != p->value.shape()) {
      throw FormatError("checkpoint: parameter '" + name + "' has shape " +
                        loaded.shape_string() + ", model expects " +
                        p->value.shape_string());
    }
    p->value = std::move(loaded);
  }
}

}  // namespace synmind::pipeline
