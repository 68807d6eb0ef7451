#pragma once

#include <vector>

#include "synmind/metrics/extractors.hpp"

namespace synmind::metrics {

/// Pairwise forced-choice rule on a precomputed correlation matrix
/// corr[i][j] = corr(f(recon_i), f(truth_j)): for every i and j != i,
/// success iff corr[i][i] > corr[i][j], ties earn half credit. Returns a
/// percentage in [0, 100]. Rank-based, so any strictly monotone transform
/// of the correlations leaves the result unchanged.
double two_way_from_correlations(const nn::Tensor<double>& corr);

/// Extracts features from both sets and applies the two-way rule.
/// Sets must be aligned by index and have at least two items.
double two_way_identification(const FeatureExtractor& extractor,
                              const std::vector<nn::Tensor<double>>& recons,
                              const std::vector<nn::Tensor<double>>& truths);

/// Mean correlation distance (1 - Pearson) between paired feature vectors;
/// lower is better.
double feature_distance(const FeatureExtractor& extractor,
                        const std::vector<nn::Tensor<double>>& recons,
                        const std::vector<nn::Tensor<double>>& truths);

}  // namespace synmind::metrics
