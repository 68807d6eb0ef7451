#pragma once

#include <filesystem>
#include <string>

#include "synmind/nncore/tensor.hpp"

namespace synmind::io {

/// Binary tensor container: magic ("SYNM" = float32, "SYND" = float64),
/// u32 rank, u32 dims[rank], then the row-major payload, all little-endian.
/// Dataset tensors are always float32; checkpoints use the run precision.

void write_tensor_f32(const std::filesystem::path& path,
                      const nn::Tensor<float>& t);
void write_tensor_f64(const std::filesystem::path& path,
                      const nn::Tensor<double>& t);

nn::Tensor<float> read_tensor_f32(const std::filesystem::path& path);
nn::Tensor<double> read_tensor_f64(const std::filesystem::path& path);

/// True if the file holds float64 data ("SYND" magic).
bool tensor_file_is_f64(const std::filesystem::path& path);

template <typename T>
void write_tensor(const std::filesystem::path& path, const nn::Tensor<T>& t) {
  if constexpr (std::is_same_v<T, float>) {
    write_tensor_f32(path, t);
  } else {
    write_tensor_f64(path, t);
  }
}

template <typename T>
nn::Tensor<T> read_tensor(const std::filesystem::path& path) {
  if constexpr (std::is_same_v<T, float>) {
    return read_tensor_f32(path);
  } else {
    return read_tensor_f64(path);
  }
}

}  // namespace synmind::io
