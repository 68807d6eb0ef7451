#include "synmind/pipeline/config.hpp"

#include <fstream>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/common/hash.hpp"

namespace synmind::pipeline {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("train config: unknown key '" + scope + it.key() + "'");
    }
  }
}

json to_json(const TrainConfig& c) {
  json weights = {{"softclip", c.weights.softclip},
                  {"swm", c.weights.swm},
                  {"denoising", c.weights.denoising},
                  {"prior", c.weights.prior},
                  {"assist", c.weights.assist}};
  json model = {{"latent_dim", c.model.latent_dim},
                {"prior_layers", c.model.prior_layers},
                {"prior_heads", c.model.prior_heads},
                {"prior_head_dim", c.model.prior_head_dim},
                {"ssv_layers", c.model.ssv_layers},
                {"ssv_width", c.model.ssv_width},
                {"visual_tokens", c.model.visual_tokens},
                {"visual_token_dim", c.model.visual_token_dim},
                {"vision_prior_layers", c.model.vision_prior_layers}};
  return json{{"weights", weights},
              {"tau", c.tau},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"base_lr", c.base_lr},
              {"min_lr", c.min_lr},
              {"seed", c.seed},
              {"mode", mode_name(c.mode)},
              {"mixco", c.mixco},
              {"granularity", c.granularity},
              {"model", model},
              {"freeze", std::vector<std::string>(c.freeze.begin(), c.freeze.end())}};
}

}  // namespace

const char* mode_name(Mode mode) {
  return mode == Mode::Full ? "full" : "semantic_only";
}

Mode mode_from_name(const std::string& name) {
  if (name == "full") return Mode::Full;
  if (name == "semantic_only") return Mode::SemanticOnly;
  throw ConfigError("train config: mode must be 'full' or 'semantic_only', got '" +
                    name + "'");
}

void TrainConfig::validate() const {
  if (tau <= 0.0) throw ConfigError("train config: tau must be positive");
  if (batch_size < 2) throw ConfigError("train config: batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (base_lr <= 0.0) throw ConfigError("train config: base_lr must be positive");
  if (weights.softclip < 0 || weights.swm < 0 || weights.denoising < 0 ||
      weights.prior < 0 || weights.assist < 0) {
    throw ConfigError("train config: loss weights must be non-negative");
  }
  static const std::set<std::string> grans = {"cc", "30", "45", "60", "75"};
  if (!grans.count(granularity)) {
    throw ConfigError("train config: granularity must be one of cc/30/45/60/75");
  }
  if (model.prior_heads * model.prior_head_dim == 0 ||
      model.latent_dim == 0 || model.ssv_width == 0) {
    throw ConfigError("train config: model dims must be positive");
  }
  for (const auto& f : freeze) {
    if (f != "swm" && f != "sse" && f != "ssv") {
      throw ConfigError("train config: freeze entries must be swm/sse/ssv");
    }
  }
}

std::string TrainConfig::canonical_json() const { return to_json(*this).dump(); }

std::string TrainConfig::hash() const { return hash_hex(canonical_json()); }

TrainConfig train_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: parse error: ") + e.what());
  }
  static const std::set<std::string> known = {
      "weights", "tau",   "batch_size", "epochs", "base_lr", "min_lr",
      "seed",    "mode",  "mixco",      "granularity", "model", "freeze"};
  reject_unknown(j, known, "");

  TrainConfig c;
  try {
    if (j.contains("weights")) {
      const json& w = j["weights"];
      reject_unknown(w, {"softclip", "swm", "denoising", "prior", "assist"},
                     "weights.");
      if (w.contains("softclip")) c.weights.softclip = w["softclip"].get<double>();
      if (w.contains("swm")) c.weights.swm = w["swm"].get<double>();
      if (w.contains("denoising")) c.weights.denoising = w["denoising"].get<double>();
      if (w.contains("prior")) c.weights.prior = w["prior"].get<double>();
      if (w.contains("assist")) c.weights.assist = w["assist"].get<double>();
    }
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("base_lr")) c.base_lr = j["base_lr"].get<double>();
    if (j.contains("min_lr")) c.min_lr = j["min_lr"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mode")) c.mode = mode_from_name(j["mode"].get<std::string>());
    if (j.contains("mixco")) c.mixco = j["mixco"].get<bool>();
    if (j.contains("granularity")) c.granularity = j["granularity"].get<std::string>();
    if (j.contains("model")) {
      const json& mj = j["model"];
      reject_unknown(mj,
                     {"latent_dim", "prior_layers", "prior_heads",
                      "prior_head_dim", "ssv_layers", "ssv_width",
                      "visual_tokens", "visual_token_dim",
                      "vision_prior_layers"},
                     "model.");
      ModelConfig& m = c.model;
      if (mj.contains("latent_dim")) m.latent_dim = mj["latent_dim"].get<std::size_t>();
      if (mj.contains("prior_layers")) m.prior_layers = mj["prior_layers"].get<std::size_t>();
      if (mj.contains("prior_heads")) m.prior_heads = mj["prior_heads"].get<std::size_t>();
      if (mj.contains("prior_head_dim")) m.prior_head_dim = mj["prior_head_dim"].get<std::size_t>();
      if (mj.contains("ssv_layers")) m.ssv_layers = mj["ssv_layers"].get<std::size_t>();
      if (mj.contains("ssv_width")) m.ssv_width = mj["ssv_width"].get<std::size_t>();
      if (mj.contains("visual_tokens")) m.visual_tokens = mj["visual_tokens"].get<std::size_t>();
      if (mj.contains("visual_token_dim")) m.visual_token_dim = mj["visual_token_dim"].get<std::size_t>();
      if (mj.contains("vision_prior_layers")) m.vision_prior_layers = mj["vision_prior_layers"].get<std::size_t>();
    }
    if (j.contains("freeze")) {
      for (const auto& f : j["freeze"].get<std::vector<std::string>>()) {
        c.freeze.insert(f);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig train_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("train config: cannot open " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return train_config_from_json_text(text);
}

std::string train_config_to_json(const TrainConfig& config) {
  return to_json(config).dump(2);
}

}  // namespace synmind::pipeline
