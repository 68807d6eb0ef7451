#include "synmind/metrics/evaluate.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/metrics/identification.hpp"
#include "synmind/metrics/image_metrics.hpp"

namespace synmind::metrics {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json row_to_json(const MetricRow& r) {
  return nlohmann::json{{"pixcorr", r.pixcorr},
                        {"ssim", r.ssim},
                        {"twoway_shallow2", r.twoway_shallow2},
                        {"twoway_shallow5", r.twoway_shallow5},
                        {"twoway_deepA", r.twoway_deep_a},
                        {"twoway_deepB", r.twoway_deep_b},
                        {"dist_distA", r.dist_a},
                        {"dist_distB", r.dist_b}};
}

}  // namespace

MetricRow evaluate_images(const std::vector<nn::Tensor<double>>& recons,
                          const std::vector<nn::Tensor<double>>& truths,
                          const ExtractorBank& bank) {
  if (recons.size() != truths.size() || recons.size() < 2) {
    throw DimensionError("evaluate_images: aligned sets of size >= 2 required");
  }
  MetricRow row;
  for (std::size_t i = 0; i < recons.size(); ++i) {
    row.pixcorr += pixcorr(recons[i], truths[i]);
    row.ssim += ssim(recons[i], truths[i]);
  }
  row.pixcorr /= static_cast<double>(recons.size());
  row.ssim /= static_cast<double>(recons.size());
  row.twoway_shallow2 = two_way_identification(bank.shallow2, recons, truths);
  row.twoway_shallow5 = two_way_identification(bank.shallow5, recons, truths);
  row.twoway_deep_a = two_way_identification(bank.deep_a, recons, truths);
  row.twoway_deep_b = two_way_identification(bank.deep_b, recons, truths);
  row.dist_a = feature_distance(bank.dist_a, recons, truths);
  row.dist_b = feature_distance(bank.dist_b, recons, truths);
  return row;
}

void write_report_csv(const MetricReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("metrics: cannot write " + path.string());
  out << "label,scope,pixcorr,ssim,twoway_shallow2,twoway_shallow5,"
         "twoway_deepA,twoway_deepB,dist_distA,dist_distB,n_samples,"
         "config_hash\n";
  auto emit = [&](const std::string& scope, const MetricRow& r) {
    out << report.label << "," << scope << "," << fmt(r.pixcorr) << ","
        << fmt(r.ssim) << "," << fmt(r.twoway_shallow2) << ","
        << fmt(r.twoway_shallow5) << "," << fmt(r.twoway_deep_a) << ","
        << fmt(r.twoway_deep_b) << "," << fmt(r.dist_a) << ","
        << fmt(r.dist_b) << "," << report.n_samples << ","
        << report.config_hash << "\n";
  };
  emit("averaged", report.averaged);
  for (const auto& [scope, row] : report.per_subject) emit(scope, row);
}

void write_report_json(const MetricReport& report,
                       const std::filesystem::path& path) {
  nlohmann::json j;
  j["label"] = report.label;
  j["averaged"] = row_to_json(report.averaged);
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [scope, row] : report.per_subject) {
    per[scope] = row_to_json(row);
  }
  j["per_subject"] = per;
  j["n_samples"] = report.n_samples;
  j["config_hash"] = report.config_hash;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("metrics: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace synmind::metrics
