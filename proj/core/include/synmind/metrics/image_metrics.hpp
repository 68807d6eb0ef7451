#pragma once

#include "synmind/nncore/tensor.hpp"

namespace synmind::metrics {

/// Pearson correlation over flattened pixels. A constant image has no
/// defined correlation; the result is 0 and a warning goes to stderr.
double pixcorr(const nn::Tensor<double>& a, const nn::Tensor<double>& b);

struct SsimOptions {
  std::size_t window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  double level = 1.0;  // dynamic range L
};

/// Mean local SSIM over sliding uniform windows (population variance).
double ssim(const nn::Tensor<double>& a, const nn::Tensor<double>& b,
            const SsimOptions& options = {});

/// Pearson correlation of two equal-length feature vectors (0 if constant).
double feature_correlation(const std::vector<double>& a,
                           const std::vector<double>& b);

}  // namespace synmind::metrics
