#include "synmind/metrics/extractors.hpp"

#include <cmath>

#include "synmind/common/errors.hpp"
#include "synmind/common/rng.hpp"

namespace synmind::metrics {

namespace {

struct KindSpec {
  const char* name;
  std::vector<std::size_t> channels;  // per conv layer output
  std::size_t output_dim;
};

KindSpec spec_for(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::Shallow2: return {"shallow-2", {8, 16}, 64};
    case ExtractorKind::Shallow5: return {"shallow-5", {8, 16, 16, 32, 32}, 96};
    case ExtractorKind::DeepA: return {"deep-A", {8, 16, 32, 32}, 128};
    case ExtractorKind::DeepB: return {"deep-B", {16, 32, 32, 32}, 512};
    case ExtractorKind::DistA: return {"dist-A", {8, 16, 32}, 128};
    case ExtractorKind::DistB: return {"dist-B", {8, 32, 32}, 128};
  }
  return {"unknown", {8}, 32};
}

}  // namespace

const char* extractor_kind_name(ExtractorKind kind) {
  return spec_for(kind).name;
}

FeatureExtractor::FeatureExtractor(ExtractorKind kind, std::uint64_t seed)
    : kind_(kind) {
  const KindSpec spec = spec_for(kind);
  output_dim_ = spec.output_dim;
  CounterRng rng = CounterRng(seed).fork(spec.name);

  std::size_t in_channels = 1;
  for (std::size_t li = 0; li < spec.channels.size(); ++li) {
    ConvLayer layer;
    layer.in_channels = in_channels;
    layer.out_channels = spec.channels[li];
    layer.kernels.resize(layer.out_channels * layer.in_channels * 9);
    CounterRng krng = rng.fork("conv").fork(li);
    const double std_dev = 1.0 / std::sqrt(9.0 * in_channels);
    for (double& w : layer.kernels) w = krng.next_gaussian() * std_dev;
    layers_.push_back(std::move(layer));
    in_channels = spec.channels[li];
  }
  last_channels_ = in_channels;

  projection_.resize(last_channels_ * output_dim_);
  CounterRng prng = rng.fork("projection");
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(last_channels_));
  for (double& w : projection_) w = prng.next_gaussian() * std_dev;
}

std::vector<double> FeatureExtractor::features(
    const nn::Tensor<double>& grid) const {
  if (grid.rank() != 2 || grid.dim(0) < 3 || grid.dim(1) < 3) {
    throw DimensionError("feature extractor: need a 2D grid of at least 3x3, got " +
                         grid.shape_string());
  }
  std::size_t h = grid.dim(0), w = grid.dim(1);

  // Per-input centering makes features invariant to DC shifts.
  double mean = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) mean += grid[i];
  mean /= static_cast<double>(grid.size());

  std::vector<double> act(h * w);
  for (std::size_t i = 0; i < grid.size(); ++i) act[i] = grid[i] - mean;
  std::size_t channels = 1;

  for (const ConvLayer& layer : layers_) {
    std::vector<double> next(layer.out_channels * h * w, 0.0);
    for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
      for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
        const double* kern = layer.kernels.data() + (oc * layer.in_channels + ic) * 9;
        const double* src = act.data() + ic * h * w;
        double* dst = next.data() + oc * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                const long yy = static_cast<long>(y) + dy;
                const long xx = static_cast<long>(x) + dx;
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) ||
                    xx >= static_cast<long>(w)) {
                  continue;  // zero padding
                }
                acc += kern[(dy + 1) * 3 + (dx + 1)] *
                       src[static_cast<std::size_t>(yy) * w +
                           static_cast<std::size_t>(xx)];
              }
            }
            dst[y * w + x] += acc;
          }
        }
      }
    }
    for (double& v : next) v = std::tanh(v);
    channels = layer.out_channels;

    // 2x2 average pool while the grid stays comfortably convolvable.
    if (h >= 6 && w >= 6) {
      const std::size_t nh = h / 2, nw = w / 2;
      std::vector<double> pooled(channels * nh * nw);
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < nh; ++y) {
          for (std::size_t x = 0; x < nw; ++x) {
            const double* src = next.data() + c * h * w;
            pooled[(c * nh + y) * nw + x] =
                0.25 * (src[(2 * y) * w + 2 * x] + src[(2 * y) * w + 2 * x + 1] +
                        src[(2 * y + 1) * w + 2 * x] +
                        src[(2 * y + 1) * w + 2 * x + 1]);
          }
        }
      }
      act = std::move(pooled);
      h = nh;
      w = nw;
    } else {
      act = std::move(next);
    }
  }

  // Global average per channel, then the fixed projection.
  std::vector<double> pooled(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src = act.data() + c * h * w;
    double acc = 0.0;
    for (std::size_t i = 0; i < h * w; ++i) acc += src[i];
    pooled[c] = acc / static_cast<double>(h * w);
  }
  std::vector<double> out(output_dim_, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    const double pc = pooled[c];
    const double* prow = projection_.data() + c * output_dim_;
    for (std::size_t o = 0; o < output_dim_; ++o) out[o] += pc * prow[o];
  }
  return out;
}

}  // namespace synmind::metrics
