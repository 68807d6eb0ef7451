#include "synmind/pipeline/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "synmind/common/errors.hpp"
#include "synmind/common/text.hpp"

namespace synmind::pipeline {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_history_csv(const std::vector<HistoryRow>& rows, Mode mode,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("history: cannot write " + path.string());
  out << "epoch,step,loss_total,loss_swm,loss_softclip,loss_mse";
  if (mode == Mode::Full) out << ",loss_ssv_prior,loss_ssv_assist,loss_ssv";
  out << ",lr\n";
  for (const HistoryRow& r : rows) {
    out << r.epoch << "," << r.step << "," << fmt(r.total) << ","
        << fmt(r.swm) << "," << fmt(r.softclip) << "," << fmt(r.mse);
    if (mode == Mode::Full) {
      out << "," << fmt(r.ssv_prior.value_or(0.0)) << ","
          << fmt(r.ssv_assist.value_or(0.0)) << "," << fmt(r.ssv.value_or(0.0));
    }
    out << "," << fmt(r.lr) << "\n";
  }
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("history: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  const bool has_ssv = header.find("loss_ssv") != std::string::npos;

  std::vector<HistoryRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(ss, field, ',')) {
        throw FormatError("history: truncated row in " + path.string());
      }
      return field;
    };
    HistoryRow r;
    r.epoch = std::stoul(next());
    r.step = std::stoul(next());
    r.total = std::stod(next());
    r.swm = std::stod(next());
    r.softclip = std::stod(next());
    r.mse = std::stod(next());
    if (has_ssv) {
      r.ssv_prior = std::stod(next());
      r.ssv_assist = std::stod(next());
      r.ssv = std::stod(next());
    }
    r.lr = std::stod(next());
    rows.push_back(r);
  }
  return rows;
}

std::vector<nn::Tensor<float>> prepare_semantic_targets(
    const nn::Tensor<float>& split_targets,
    const std::vector<std::uint64_t>& ids,
    const mimevis::CaptionTable& captions, const std::string& granularity) {
  const std::size_t n = split_targets.dim(0);
  const std::size_t token_count = split_targets.dim(1);
  const std::size_t token_dim = split_targets.dim(2);
  if (ids.size() != n) {
    throw DimensionError("semantic targets: id list does not match tensor rows");
  }
  std::vector<nn::Tensor<float>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!captions.contains(ids[i])) {
      throw MissingInputError("semantic targets: stimulus " +
                              std::to_string(ids[i]) +
                              " is missing captions; run caption synthesis first");
    }
    const std::string& caption = captions.caption(ids[i], granularity);
    const std::size_t n_active =
        active_tokens(text::word_count(caption), token_count);
    nn::Tensor<float> full({token_count, token_dim});
    std::copy(split_targets.data() + i * token_count * token_dim,
              split_targets.data() + (i + 1) * token_count * token_dim,
              full.data());
    out.push_back(masked_target(full, n_active));
  }
  return out;
}

nn::Tensor<double> pool_pixels(const nn::Tensor<double>& image) {
  const std::size_t h = image.dim(0), w = image.dim(1);
  const std::size_t nh = std::max<std::size_t>(1, h / 2);
  const std::size_t nw = std::max<std::size_t>(1, w / 2);
  nn::Tensor<double> out({nh, nw});
  for (std::size_t y = 0; y < nh; ++y) {
    for (std::size_t x = 0; x < nw; ++x) {
      const std::size_t sy = std::min(2 * y, h - 1);
      const std::size_t sx = std::min(2 * x, w - 1);
      const std::size_t sy2 = std::min(sy + 1, h - 1);
      const std::size_t sx2 = std::min(sx + 1, w - 1);
      out.at(y, x) = 0.25 * (image.at(sy, sx) + image.at(sy, sx2) +
                             image.at(sy2, sx) + image.at(sy2, sx2));
    }
  }
  return out;
}

}  // namespace synmind::pipeline
