#include "synmind/viz/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "synmind/common/errors.hpp"

namespace synmind::viz {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_metric_bars_svg(const metrics::MetricReport& report,
                           const std::filesystem::path& path) {
  struct Bar {
    const char* name;
    double value;
    double scale;  // display height divisor
  };
  const metrics::MetricRow& r = report.averaged;
  const std::vector<Bar> bars = {
      {"PixCorr", r.pixcorr, 1.0},      {"SSIM", r.ssim, 1.0},
      {"2W sh-2", r.twoway_shallow2, 100.0}, {"2W sh-5", r.twoway_shallow5, 100.0},
      {"2W deep-A", r.twoway_deep_a, 100.0}, {"2W deep-B", r.twoway_deep_b, 100.0},
      {"Dist-A", r.dist_a, 1.0},        {"Dist-B", r.dist_b, 1.0},
  };
  const int bar_w = 56, gap = 18, plot_h = 220, pad = 40;
  const int width = pad * 2 + static_cast<int>(bars.size()) * (bar_w + gap);
  const int height = plot_h + 90;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("svg: cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << report.label << " evaluation (" << report.n_samples
      << " test stimuli)</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double frac =
        std::clamp(bars[i].value / bars[i].scale, 0.0, 1.0);
    const int x = pad + static_cast<int>(i) * (bar_w + gap);
    const int bh = static_cast<int>(frac * plot_h);
    const int y = 30 + plot_h - bh;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
        << "\" height=\"" << bh << "\" fill=\"#4878a8\"/>\n";
    out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << y - 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << num(bars[i].value) << "</text>\n";
    out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << 30 + plot_h + 16
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << bars[i].name << "</text>\n";
  }
  out << "</svg>\n";
}

void write_roi_heatmap_svg(const metrics::RoiImportanceMap& map,
                           const std::filesystem::path& path) {
  // Group voxels by ROI label, one row each, cells colored by weight.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < map.weights.size(); ++v) {
    groups[map.groups[v]].push_back(v);
  }
  double max_w = 0.0;
  for (double w : map.weights) max_w = std::max(max_w, w);
  if (max_w <= 0.0) max_w = 1.0;

  std::size_t longest = 0;
  for (const auto& [name, voxels] : groups) {
    longest = std::max(longest, voxels.size());
  }
  const int cell = 14, row_h = 20, label_w = 64, pad = 30;
  const int width = label_w + static_cast<int>(longest) * cell + pad;
  const int height = pad + static_cast<int>(groups.size()) * row_h + 30;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("svg: cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"6\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
         "subject "
      << map.subject << ", granularity " << map.granularity
      << " (entropy " << num(map.entropy) << " nats)</text>\n";
  int row = 0;
  for (const auto& [name, voxels] : groups) {
    const int y = pad + row * row_h;
    out << "<text x=\"6\" y=\"" << y + cell - 2
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << name
        << "</text>\n";
    for (std::size_t i = 0; i < voxels.size(); ++i) {
      // red (low) to yellow (high): green channel tracks the weight.
      const double frac = map.weights[voxels[i]] / max_w;
      const int green = static_cast<int>(40 + 200 * frac);
      out << "<rect x=\"" << label_w + static_cast<int>(i) * cell << "\" y=\""
          << y << "\" width=\"" << cell - 1 << "\" height=\"" << cell
          << "\" fill=\"rgb(220," << green << ",40)\"/>\n";
    }
    ++row;
  }
  out << "</svg>\n";
}

}  // namespace synmind::viz
