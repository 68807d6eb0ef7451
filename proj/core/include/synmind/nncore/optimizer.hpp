#pragma once

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "synmind/common/errors.hpp"
#include "synmind/nncore/tape.hpp"

namespace synmind::nn {

/// lr = min_lr + 0.5 * (base_lr - min_lr) * (1 + cos(pi * step / total)).
/// Steps outside [0, total_steps] clamp to the endpoints.
inline double cosine_lr(std::size_t step, double base_lr, double min_lr,
                        std::size_t total_steps) {
  if (total_steps == 0) return base_lr;
  if (step >= total_steps) return min_lr;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * frac));
}

template <typename T>
struct AdamConfig {
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

/// Adam with bias correction. Moment buffers are keyed by parameter address
/// and created lazily on the first step.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig<T> cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Parameter<T>*>& params, T lr) {
    ++t_;
    const T bc1 = T(1) - std::pow(cfg_.beta1, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(cfg_.beta2, static_cast<T>(t_));
    for (Parameter<T>* p : params) {
      State& s = states_[p];
      if (s.m.size() != p->value.size()) {
        s.m = Tensor<T>(p->value.shape());
        s.v = Tensor<T>(p->value.shape());
      }
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const T g = p->grad[i];
        if (!std::isfinite(static_cast<double>(g))) {
          throw TrainingError("NaN gradient in parameter " + p->name);
        }
        s.m[i] = cfg_.beta1 * s.m[i] + (T(1) - cfg_.beta1) * g;
        s.v[i] = cfg_.beta2 * s.v[i] + (T(1) - cfg_.beta2) * g * g;
        const T mhat = s.m[i] / bc1;
        const T vhat = s.v[i] / bc2;
        p->value[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  std::size_t step_count() const { return t_; }

 private:
  struct State {
    Tensor<T> m, v;
  };
  AdamConfig<T> cfg_;
  std::size_t t_ = 0;
  std::unordered_map<Parameter<T>*, State> states_;
};

}  // namespace synmind::nn
