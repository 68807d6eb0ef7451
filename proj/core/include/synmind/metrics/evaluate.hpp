#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synmind/metrics/extractors.hpp"

namespace synmind::metrics {

/// The eight-column evaluation row: two pixel metrics, four two-way
/// identification percentages, two feature distances (lower better).
struct MetricRow {
  double pixcorr = 0.0;
  double ssim = 0.0;
  double twoway_shallow2 = 0.0;
  double twoway_shallow5 = 0.0;
  double twoway_deep_a = 0.0;
  double twoway_deep_b = 0.0;
  double dist_a = 0.0;
  double dist_b = 0.0;
};

struct MetricReport {
  std::string label;  // e.g. "SynMind" or "SynMind*"
  MetricRow averaged;
  std::map<std::string, MetricRow> per_subject;  // "subject0" -> row
  std::size_t n_samples = 0;
  std::string config_hash;
};

/// Default frozen extractor set used by the evaluation battery.
struct ExtractorBank {
  FeatureExtractor shallow2{ExtractorKind::Shallow2};
  FeatureExtractor shallow5{ExtractorKind::Shallow5};
  FeatureExtractor deep_a{ExtractorKind::DeepA};
  FeatureExtractor deep_b{ExtractorKind::DeepB};
  FeatureExtractor dist_a{ExtractorKind::DistA};
  FeatureExtractor dist_b{ExtractorKind::DistB};
};

/// Computes the full row over aligned image sets (means over samples for
/// the pixel metrics and distances).
MetricRow evaluate_images(const std::vector<nn::Tensor<double>>& recons,
                          const std::vector<nn::Tensor<double>>& truths,
                          const ExtractorBank& bank);

void write_report_csv(const MetricReport& report,
                      const std::filesystem::path& path);
void write_report_json(const MetricReport& report,
                       const std::filesystem::path& path);

}  // namespace synmind::metrics
