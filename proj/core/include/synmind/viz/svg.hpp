#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synmind/metrics/evaluate.hpp"
#include "synmind/metrics/roi.hpp"

namespace synmind::viz {

/// Bar chart of the eight evaluation metrics. Self-contained SVG; the data
/// always ships alongside as CSV, so the plot is optional.
void write_metric_bars_svg(const metrics::MetricReport& report,
                           const std::filesystem::path& path);

/// Flat voxel-importance heatmap, one row per synthetic ROI group, colored
/// red (low) to yellow (high).
void write_roi_heatmap_svg(const metrics::RoiImportanceMap& map,
                           const std::filesystem::path& path);

}  // namespace synmind::viz
