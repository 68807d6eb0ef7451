#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "synmind/metrics/extractors.hpp"

namespace synmind::metrics {

enum class Choice { First, Second, Tie };

/// A forced-choice participant. Sees the two presented options plus the
/// original stimulus it just "viewed" and picks the more similar option.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual Choice choose(const nn::Tensor<double>& first,
                        const nn::Tensor<double>& second,
                        const nn::Tensor<double>& original) = 0;
  virtual std::string name() const = 0;
};

/// Reference programmatic judge: higher feature correlation to the original
/// wins; exact equality is a tie.
class CorrelationJudge : public Judge {
 public:
  explicit CorrelationJudge(const FeatureExtractor* extractor)
      : extractor_(extractor) {}
  Choice choose(const nn::Tensor<double>& first,
                const nn::Tensor<double>& second,
                const nn::Tensor<double>& original) override;
  std::string name() const override { return "correlation"; }

 private:
  const FeatureExtractor* extractor_;
};

/// Attentive but uninformative participant: recognizes an option that is
/// exactly the original (so it passes sentinels), otherwise picks uniformly.
class RandomJudge : public Judge {
 public:
  explicit RandomJudge(std::uint64_t seed);
  Choice choose(const nn::Tensor<double>& first,
                const nn::Tensor<double>& second,
                const nn::Tensor<double>& original) override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Inattentive participant: uniform even on sentinels. Exists to exercise
/// the exclusion rule.
class CarelessJudge : public Judge {
 public:
  explicit CarelessJudge(std::uint64_t seed);
  Choice choose(const nn::Tensor<double>& first,
                const nn::Tensor<double>& second,
                const nn::Tensor<double>& original) override;
  std::string name() const override { return "careless"; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct TwoAfcConfig {
  std::uint64_t seed = 0;
  std::size_t sentinel_every = 20;  // a sentinel occupies every 20th slot
};

struct TrialRecord {
  std::size_t judge = 0;
  std::size_t slot = 0;  // 1-based presentation position
  std::uint64_t stimulus_id = 0;
  bool sentinel = false;
  bool a_shown_first = false;   // real trials: presentation order
  std::string outcome;          // "A", "B", "tie", "pass", "fail"
};

struct TwoAfcResult {
  double rate = 0.0;             // percent of valid trials preferring A
  double delta = 0.0;            // rate - 50, exactly
  std::size_t valid_trials = 0;  // real trials from non-excluded judges
  std::size_t sentinel_trials = 0;
  std::vector<std::size_t> excluded_judges;
  std::vector<TrialRecord> records;
};

/// Runs the forced-choice session over aligned render sets. Every 20th slot
/// is a sentinel whose options include the original stimulus; a judge that
/// fails any sentinel has all of its responses excluded. With fewer than 20
/// real trials no sentinel fits and a warning is emitted.
TwoAfcResult run_2afc(const TwoAfcConfig& config,
                      const std::vector<std::unique_ptr<Judge>>& judges,
                      const std::vector<nn::Tensor<double>>& renders_a,
                      const std::vector<nn::Tensor<double>>& renders_b,
                      const std::vector<nn::Tensor<double>>& originals,
                      const std::vector<std::uint64_t>& stimulus_ids);

}  // namespace synmind::metrics
