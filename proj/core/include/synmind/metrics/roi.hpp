#pragma once

#include <string>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace synmind::metrics {

/// Normalized per-voxel importance derived from a subject's first-layer
/// mapper weights, with a synthetic ROI partition for reporting.
struct RoiImportanceMap {
  std::size_t subject = 0;
  std::string granularity;
  std::vector<double> weights;      // non-negative, sums to 1
  std::vector<std::string> groups;  // synthetic ROI label per voxel
  double entropy = 0.0;             // nats, of the weight distribution
};

/// Voxel importance w_v = mean over output units of |W[v, :]|, normalized so
/// the weights sum to 1. `first_layer` is the (Z_k, d) mapper weight matrix.
/// Invariant to positive rescaling of the weights.
RoiImportanceMap roi_importance(const nn::Tensor<double>& first_layer,
                                std::size_t subject,
                                const std::string& granularity);

/// Synthetic ROI partition: voxels assigned round-robin to familiar region
/// names. Cosmetic labels, not anatomy.
const std::vector<std::string>& roi_group_names();

}  // namespace synmind::metrics
