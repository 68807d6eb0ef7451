#pragma once

#include <filesystem>

#include "synmind/nncore/tensor.hpp"

namespace synmind::viz {

/// Writes a [0,1] grayscale image as an 8-bit PNG. Fixed zlib settings keep
/// the output byte-stable across runs.
void write_png_gray(const std::filesystem::path& path,
                    const nn::Tensor<double>& image);

}  // namespace synmind::viz
