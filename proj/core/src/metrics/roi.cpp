#include "synmind/metrics/roi.hpp"

#include <cmath>

#include "synmind/common/errors.hpp"

namespace synmind::metrics {

const std::vector<std::string>& roi_group_names() {
  static const std::vector<std::string> kGroups = {"V1",  "V2",  "V3",
                                                   "V4",  "PPA", "TPOJ"};
  return kGroups;
}

RoiImportanceMap roi_importance(const nn::Tensor<double>& first_layer,
                                std::size_t subject,
                                const std::string& granularity) {
  if (first_layer.rank() != 2) {
    throw DimensionError("roi_importance: expected a (voxels, latent) matrix, got " +
                         first_layer.shape_string());
  }
  const std::size_t z = first_layer.dim(0);
  const std::size_t d = first_layer.dim(1);

  RoiImportanceMap map;
  map.subject = subject;
  map.granularity = granularity;
  map.weights.resize(z);

  double total = 0.0;
  for (std::size_t v = 0; v < z; ++v) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += std::abs(first_layer.at(v, j));
    map.weights[v] = acc / static_cast<double>(d);
    total += map.weights[v];
  }
  if (total <= 0.0) {
    // Degenerate all-zero weights: fall back to a uniform map.
    for (double& w : map.weights) w = 1.0 / static_cast<double>(z);
  } else {
    for (double& w : map.weights) w /= total;
  }

  const auto& groups = roi_group_names();
  map.groups.reserve(z);
  for (std::size_t v = 0; v < z; ++v) {
    map.groups.push_back(groups[v % groups.size()]);
  }

  for (double w : map.weights) {
    if (w > 0.0) map.entropy -= w * std::log(w);
  }
  return map;
}

}  // namespace synmind::metrics
