#pragma once

#include <functional>
#include <string>
#include <vector>

#include "synmind/nncore/ops.hpp"

namespace synmind::nn {

struct GradCheckEntry {
  std::string param;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Compares the tape gradient of a scalar loss against central finite
/// differences, element by element. `build` must construct the full forward
/// graph from the parameters' current values and return the loss node.
///
/// Relative error uses max(|analytic| + |numeric|, 1e-8) as denominator, so
/// near-zero gradient pairs do not produce spurious blowups.
template <typename T = double>
GradCheckReport gradient_check(
    const std::function<NodeId<T>(Tape<T>&)>& build,
    const std::vector<Parameter<T>*>& params, T h = T(1e-5)) {
  for (Parameter<T>* p : params) p->zero_grad();
  {
    Tape<T> tape;
    NodeId<T> loss = build(tape);
    tape.backward(loss);
  }

  auto eval = [&]() -> double {
    Tape<T> tape;
    NodeId<T> loss = build(tape);
    return static_cast<double>(tape.value(loss)[0]);
  };

  GradCheckReport report;
  for (Parameter<T>* p : params) {
    GradCheckEntry entry{p->name, 0.0};
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const T saved = p->value[i];
      p->value[i] = saved + h;
      const double up = eval();
      p->value[i] = saved - h;
      const double down = eval();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * static_cast<double>(h));
      const double analytic = static_cast<double>(p->grad[i]);
      const double denom =
          std::max(std::abs(analytic) + std::abs(numeric), 1e-8);
      entry.max_rel_error =
          std::max(entry.max_rel_error, std::abs(analytic - numeric) / denom);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace synmind::nn
