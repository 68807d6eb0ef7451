#include "synmind/metrics/image_metrics.hpp"

#include <cmath>
#include <iostream>
#include <vector>

#include "synmind/common/errors.hpp"

namespace synmind::metrics {

namespace {

double pearson(const double* a, const double* b, std::size_t n, bool* constant) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    if (constant != nullptr) *constant = true;
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double pixcorr(const nn::Tensor<double>& a, const nn::Tensor<double>& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("pixcorr: shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  bool constant = false;
  const double r = pearson(a.data(), b.data(), a.size(), &constant);
  if (constant) {
    std::cerr << "[synmind] warning: pixcorr of a constant image is undefined, "
                 "returning 0\n";
  }
  return r;
}

double feature_correlation(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("feature_correlation: length mismatch");
  }
  return pearson(a.data(), b.data(), a.size(), nullptr);
}

double ssim(const nn::Tensor<double>& a, const nn::Tensor<double>& b,
            const SsimOptions& options) {
  if (!a.same_shape(b) || a.rank() != 2) {
    throw DimensionError("ssim: need two equal 2D images, got " +
                         a.shape_string() + " vs " + b.shape_string());
  }
  const std::size_t h = a.dim(0), w = a.dim(1), win = options.window;
  if (win > h || win > w) {
    throw DimensionError("ssim: window " + std::to_string(win) +
                         " larger than image " + a.shape_string());
  }

  // Integral images for O(1) window sums.
  const std::size_t iw = w + 1;
  auto integral = [&](auto value) {
    std::vector<double> s((h + 1) * iw, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
      double row = 0.0;
      for (std::size_t x = 0; x < w; ++x) {
        row += value(y, x);
        s[(y + 1) * iw + (x + 1)] = s[y * iw + (x + 1)] + row;
      }
    }
    return s;
  };
  const auto sa = integral([&](std::size_t y, std::size_t x) { return a.at(y, x); });
  const auto sb = integral([&](std::size_t y, std::size_t x) { return b.at(y, x); });
  const auto saa = integral([&](std::size_t y, std::size_t x) { return a.at(y, x) * a.at(y, x); });
  const auto sbb = integral([&](std::size_t y, std::size_t x) { return b.at(y, x) * b.at(y, x); });
  const auto sab = integral([&](std::size_t y, std::size_t x) { return a.at(y, x) * b.at(y, x); });

  auto window_sum = [&](const std::vector<double>& s, std::size_t y,
                        std::size_t x) {
    return s[(y + win) * iw + (x + win)] - s[y * iw + (x + win)] -
           s[(y + win) * iw + x] + s[y * iw + x];
  };

  const double c1 = (options.k1 * options.level) * (options.k1 * options.level);
  const double c2 = (options.k2 * options.level) * (options.k2 * options.level);
  const double n = static_cast<double>(win * win);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + win <= h; ++y) {
    for (std::size_t x = 0; x + win <= w; ++x) {
      const double mu_a = window_sum(sa, y, x) / n;
      const double mu_b = window_sum(sb, y, x) / n;
      const double var_a = window_sum(saa, y, x) / n - mu_a * mu_a;
      const double var_b = window_sum(sbb, y, x) / n - mu_b * mu_b;
      const double cov = window_sum(sab, y, x) / n - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den =
          (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace synmind::metrics
