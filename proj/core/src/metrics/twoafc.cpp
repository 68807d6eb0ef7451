#include "synmind/metrics/twoafc.hpp"

#include <algorithm>
#include <cstring>
#include <iostream>

#include "synmind/common/errors.hpp"
#include "synmind/common/rng.hpp"
#include "synmind/metrics/image_metrics.hpp"

namespace synmind::metrics {

namespace {

bool same_image(const nn::Tensor<double>& a, const nn::Tensor<double>& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

Choice CorrelationJudge::choose(const nn::Tensor<double>& first,
                                const nn::Tensor<double>& second,
                                const nn::Tensor<double>& original) {
  const auto f_orig = extractor_->features(original);
  const double c1 = feature_correlation(extractor_->features(first), f_orig);
  const double c2 = feature_correlation(extractor_->features(second), f_orig);
  if (c1 > c2) return Choice::First;
  if (c2 > c1) return Choice::Second;
  return Choice::Tie;
}

RandomJudge::RandomJudge(std::uint64_t seed) : seed_(seed) {}

Choice RandomJudge::choose(const nn::Tensor<double>& first,
                           const nn::Tensor<double>& second,
                           const nn::Tensor<double>& original) {
  if (same_image(first, original) && !same_image(second, original)) {
    return Choice::First;
  }
  if (same_image(second, original) && !same_image(first, original)) {
    return Choice::Second;
  }
  return (mix_u64(seed_, counter_++) & 1) ? Choice::First : Choice::Second;
}

CarelessJudge::CarelessJudge(std::uint64_t seed) : seed_(seed) {}

Choice CarelessJudge::choose(const nn::Tensor<double>&, const nn::Tensor<double>&,
                             const nn::Tensor<double>&) {
  return (mix_u64(seed_, counter_++) & 1) ? Choice::First : Choice::Second;
}

TwoAfcResult run_2afc(const TwoAfcConfig& config,
                      const std::vector<std::unique_ptr<Judge>>& judges,
                      const std::vector<nn::Tensor<double>>& renders_a,
                      const std::vector<nn::Tensor<double>>& renders_b,
                      const std::vector<nn::Tensor<double>>& originals,
                      const std::vector<std::uint64_t>& stimulus_ids) {
  const std::size_t n = originals.size();
  if (renders_a.size() != n || renders_b.size() != n ||
      stimulus_ids.size() != n || n == 0) {
    throw DimensionError("run_2afc: aligned non-empty render/original sets required");
  }
  if (n < config.sentinel_every) {
    std::cerr << "[synmind] warning: fewer than " << config.sentinel_every
              << " trials, no sentinel can be inserted\n";
  }

  TwoAfcResult result;
  double credit = 0.0;

  for (std::size_t ji = 0; ji < judges.size(); ++ji) {
    CounterRng rng = CounterRng(config.seed).fork("judge").fork(ji);

    // Per-judge shuffled order of real trials.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.next_below(i)]);
    }

    bool excluded = false;
    double judge_credit = 0.0;
    std::size_t judge_real = 0;
    std::vector<TrialRecord> judge_records;

    std::size_t slot = 0;
    std::size_t cursor = 0;
    while (cursor < n) {
      ++slot;
      const bool is_sentinel =
          config.sentinel_every > 0 && slot % config.sentinel_every == 0;
      TrialRecord rec;
      rec.judge = ji;
      rec.slot = slot;
      rec.sentinel = is_sentinel;

      if (is_sentinel) {
        // One option is the original itself; the other is a render.
        const std::size_t idx = rng.next_below(n);
        rec.stimulus_id = stimulus_ids[idx];
        const bool original_first = rng.next_below(2) == 0;
        const nn::Tensor<double>& render =
            rng.next_below(2) == 0 ? renders_a[idx] : renders_b[idx];
        const nn::Tensor<double>& first =
            original_first ? originals[idx] : render;
        const nn::Tensor<double>& second =
            original_first ? render : originals[idx];
        const Choice c = judges[ji]->choose(first, second, originals[idx]);
        const bool ok = (original_first && c == Choice::First) ||
                        (!original_first && c == Choice::Second);
        rec.outcome = ok ? "pass" : "fail";
        ++result.sentinel_trials;
        if (!ok) excluded = true;
      } else {
        const std::size_t idx = order[cursor++];
        rec.stimulus_id = stimulus_ids[idx];
        rec.a_shown_first = rng.next_below(2) == 0;
        const nn::Tensor<double>& first =
            rec.a_shown_first ? renders_a[idx] : renders_b[idx];
        const nn::Tensor<double>& second =
            rec.a_shown_first ? renders_b[idx] : renders_a[idx];
        const Choice c = judges[ji]->choose(first, second, originals[idx]);
        if (c == Choice::Tie) {
          rec.outcome = "tie";
          judge_credit += 0.5;
        } else {
          const bool chose_a = (c == Choice::First) == rec.a_shown_first;
          rec.outcome = chose_a ? "A" : "B";
          if (chose_a) judge_credit += 1.0;
        }
        ++judge_real;
      }
      judge_records.push_back(std::move(rec));
    }

    result.records.insert(result.records.end(), judge_records.begin(),
                          judge_records.end());
    if (excluded) {
      result.excluded_judges.push_back(ji);
    } else {
      credit += judge_credit;
      result.valid_trials += judge_real;
    }
  }

  result.rate =
      result.valid_trials == 0
          ? 0.0
          : 100.0 * credit / static_cast<double>(result.valid_trials);
  result.delta = result.rate - 50.0;
  return result;
}

}  // namespace synmind::metrics
