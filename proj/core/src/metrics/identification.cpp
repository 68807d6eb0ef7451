#include "synmind/metrics/identification.hpp"

#include "synmind/common/errors.hpp"
#include "synmind/metrics/image_metrics.hpp"

namespace synmind::metrics {

double two_way_from_correlations(const nn::Tensor<double>& corr) {
  if (corr.rank() != 2 || corr.dim(0) != corr.dim(1) || corr.dim(0) < 2) {
    throw DimensionError("two_way: need a square correlation matrix of size >= 2");
  }
  const std::size_t n = corr.dim(0);
  double credit = 0.0;
  std::size_t trials = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double own = corr.at(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double other = corr.at(i, j);
      if (own > other) {
        credit += 1.0;
      } else if (own == other) {
        credit += 0.5;
      }
      ++trials;
    }
  }
  return 100.0 * credit / static_cast<double>(trials);
}

double two_way_identification(const FeatureExtractor& extractor,
                              const std::vector<nn::Tensor<double>>& recons,
                              const std::vector<nn::Tensor<double>>& truths) {
  if (recons.size() != truths.size() || recons.size() < 2) {
    throw DimensionError(
        "two_way_identification: aligned sets of size >= 2 required");
  }
  const std::size_t n = recons.size();
  std::vector<std::vector<double>> f_rec(n), f_tru(n);
  for (std::size_t i = 0; i < n; ++i) {
    f_rec[i] = extractor.features(recons[i]);
    f_tru[i] = extractor.features(truths[i]);
  }
  nn::Tensor<double> corr({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      corr.at(i, j) = feature_correlation(f_rec[i], f_tru[j]);
    }
  }
  return two_way_from_correlations(corr);
}

double feature_distance(const FeatureExtractor& extractor,
                        const std::vector<nn::Tensor<double>>& recons,
                        const std::vector<nn::Tensor<double>>& truths) {
  if (recons.size() != truths.size() || recons.empty()) {
    throw DimensionError("feature_distance: aligned non-empty sets required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < recons.size(); ++i) {
    total += 1.0 - feature_correlation(extractor.features(recons[i]),
                                       extractor.features(truths[i]));
  }
  return total / static_cast<double>(recons.size());
}

}  // namespace synmind::metrics
