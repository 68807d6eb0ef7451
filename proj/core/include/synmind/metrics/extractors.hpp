#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace synmind::metrics {

/// Stand-ins for the pretrained feature networks behind the evaluation
/// columns: two shallow kinds, two deep identification kinds, two distance
/// kinds. Frozen random conv stacks; same seed, same features, forever.
enum class ExtractorKind { Shallow2, Shallow5, DeepA, DeepB, DistA, DistB };

constexpr std::uint64_t kDefaultExtractorSeed = 0x5ee0;

const char* extractor_kind_name(ExtractorKind kind);

/// Seeded stack of 3x3 convolutions with tanh activations and 2x2 average
/// pooling, followed by global average pooling and a fixed random projection.
/// Accepts any 2D grid (images or token grids) of at least 3x3.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(ExtractorKind kind,
                            std::uint64_t seed = kDefaultExtractorSeed);

  std::vector<double> features(const nn::Tensor<double>& grid) const;
  std::size_t output_dim() const { return output_dim_; }
  ExtractorKind kind() const { return kind_; }

 private:
  struct ConvLayer {
    std::size_t in_channels = 0, out_channels = 0;
    std::vector<double> kernels;  // (out, in, 3, 3)
  };

  ExtractorKind kind_;
  std::size_t output_dim_ = 0;
  std::vector<ConvLayer> layers_;
  std::vector<double> projection_;  // (last_channels, output_dim)
  std::size_t last_channels_ = 0;
};

}  // namespace synmind::metrics
