#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/metrics/twoafc.hpp"
#include "synmind/mimevis/mimevis.hpp"
#include "synmind/pipeline/evaluate.hpp"
#include "synmind/pipeline/store.hpp"
#include "synmind/pipeline/trainer.hpp"
#include "synmind/viz/png.hpp"
#include "synmind/viz/svg.hpp"

namespace synmind::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

/// Every run appends exactly one record to the run log.
class RunRecord {
 public:
  RunRecord(const CommonOptions& common, std::string subcommand)
      : path_(common.run_log), start_(iso_timestamp()) {
    record_["subcommand"] = std::move(subcommand);
    record_["tool_version"] = kToolVersion;
  }

  void set_config_hash(const std::string& h) { record_["config_hash"] = h; }
  void set_seed(std::uint64_t s) { record_["seed"] = s; }
  void add_artifact(const fs::path& p) { artifacts_.push_back(p.string()); }

  ~RunRecord() {
    record_["started"] = start_;
    record_["finished"] = iso_timestamp();
    record_["artifacts"] = artifacts_;
    std::ofstream out(path_, std::ios::app);
    if (out) out << record_.dump() << "\n";
  }

 private:
  fs::path path_;
  std::string start_;
  json record_;
  std::vector<std::string> artifacts_;
};

int guard(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

mimevis::MimevisOptions caption_options(const GenCaptionsOptions& opt) {
  mimevis::MimevisOptions options;
  options.budgets = opt.budgets;
  options.seed = opt.seed;
  options.max_inflight = opt.max_inflight;
  if (!opt.template_dir.empty()) {
    options.templates = mimevis::PromptTemplates::from_directory(opt.template_dir);
  }
  return options;
}

pipeline::TrainConfig resolve_train_config(const TrainOptions& opt) {
  pipeline::TrainConfig config;
  if (!opt.config_path.empty()) {
    config = pipeline::train_config_from_json_file(opt.config_path);
  }
  if (!opt.mode.empty()) config.mode = pipeline::mode_from_name(opt.mode);
  if (!opt.granularity.empty()) config.granularity = opt.granularity;
  if (opt.seed_set) config.seed = opt.seed;
  if (opt.epochs > 0) config.epochs = opt.epochs;
  if (opt.batch_size > 0) config.batch_size = opt.batch_size;
  if (opt.mixco >= 0) config.mixco = opt.mixco == 1;
  if (!opt.freeze.empty()) {
    std::size_t pos = 0;
    while (pos != std::string::npos) {
      const std::size_t next = opt.freeze.find(',', pos);
      config.freeze.insert(opt.freeze.substr(
          pos, next == std::string::npos ? next : next - pos));
      pos = next == std::string::npos ? next : next + 1;
    }
  }
  config.validate();
  return config;
}

template <typename T>
void train_with_precision(const TrainOptions& opt,
                          const pipeline::TrainConfig& config,
                          RunRecord& record) {
  data::Dataset dataset = data::load_dataset(opt.dataset_dir);
  mimevis::CaptionTable captions = mimevis::CaptionTable::load(opt.corpus_file);

  pipeline::Trainer<T> trainer(dataset, captions, config);
  auto result = trainer.train(&std::cout);

  fs::create_directories(opt.out_dir);
  pipeline::save_pipeline<T>(result.model, opt.out_dir,
                             trainer.assist_pixel_dim(),
                             trainer.assist_feature_dim());
  pipeline::write_history_csv(result.history, config.mode,
                              opt.out_dir / "history.csv");
  record.add_artifact(opt.out_dir / "checkpoint.json");
  record.add_artifact(opt.out_dir / "history.csv");

  if (!opt.skip_renderer) {
    auto examples = pipeline::build_renderer_examples<T>(
        result.model, dataset, captions, opt.renderer_teacher_forcing);
    render::RendererTrainConfig rcfg;
    rcfg.seed = config.seed;
    rcfg.epochs = opt.renderer_epochs;
    auto renderer = render::train_decoder<T>(
        examples, dataset.manifest.config.image_side, rcfg, &std::cout);
    pipeline::save_renderer<T>(renderer, opt.out_dir, rcfg.hidden, rcfg.seed);
    record.add_artifact(opt.out_dir / "renderer.json");
  }
}

template <typename T>
void eval_with_precision(const EvalOptions& opt, RunRecord& record) {
  const fs::path renderer_dir =
      opt.renderer_dir.empty() ? opt.checkpoint_dir : opt.renderer_dir;
  pipeline::PipelineModel<T> model =
      pipeline::load_pipeline<T>(opt.checkpoint_dir);
  render::DecoderRenderer<T> renderer =
      pipeline::load_renderer<T>(renderer_dir);
  data::Dataset dataset = data::load_dataset(opt.dataset_dir);
  mimevis::CaptionTable captions = mimevis::CaptionTable::load(opt.corpus_file);

  metrics::ExtractorBank bank;
  auto artifacts =
      pipeline::evaluate_model<T>(model, renderer, dataset, captions, bank);

  fs::create_directories(opt.out_dir);
  metrics::write_report_csv(artifacts.report, opt.out_dir / "metrics.csv");
  metrics::write_report_json(artifacts.report, opt.out_dir / "metrics.json");
  viz::write_metric_bars_svg(artifacts.report, opt.out_dir / "metrics.svg");
  record.add_artifact(opt.out_dir / "metrics.csv");
  record.add_artifact(opt.out_dir / "metrics.json");
  record.add_artifact(opt.out_dir / "metrics.svg");
  record.set_config_hash(artifacts.report.config_hash);

  // Originals once, reconstructions per subject: PNG plus raw floats.
  const fs::path orig_dir = opt.out_dir / "originals";
  fs::create_directories(orig_dir);
  for (std::size_t i = 0; i < artifacts.originals.size(); ++i) {
    const std::string stem = "orig_" + std::to_string(artifacts.test_ids[i]);
    viz::write_png_gray(orig_dir / (stem + ".png"), artifacts.originals[i]);
    io::write_tensor_f32(orig_dir / (stem + ".bin"),
                         artifacts.originals[i].template cast<float>());
  }
  for (std::size_t k = 0; k < artifacts.recons.size(); ++k) {
    const fs::path sdir = opt.out_dir / ("subject" + std::to_string(k));
    fs::create_directories(sdir);
    for (std::size_t i = 0; i < artifacts.recons[k].size(); ++i) {
      const std::string stem =
          "recon_" + std::to_string(artifacts.test_ids[i]);
      viz::write_png_gray(sdir / (stem + ".png"), artifacts.recons[k][i]);
      io::write_tensor_f32(sdir / (stem + ".bin"),
                           artifacts.recons[k][i].template cast<float>());
    }
  }
}

template <typename T>
void roi_map_with_precision(const fs::path& checkpoint_dir,
                            const fs::path& out_dir, RunRecord& record,
                            std::ofstream& summary) {
  pipeline::PipelineModel<T> model = pipeline::load_pipeline<T>(checkpoint_dir);
  const std::string granularity = model.config.granularity;
  for (std::size_t k = 0; k < model.world.n_subjects; ++k) {
    nn::Tensor<double> weight =
        model.swm.subject_maps[k].weight.value.template cast<double>();
    metrics::RoiImportanceMap map =
        metrics::roi_importance(weight, k, granularity);

    const std::string stem =
        "roi_" + std::to_string(k) + "_" + granularity;
    const fs::path csv_path = out_dir / (stem + ".csv");
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << "voxel,group,weight\n";
    for (std::size_t v = 0; v < map.weights.size(); ++v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", map.weights[v]);
      csv << v << "," << map.groups[v] << "," << buf << "\n";
    }
    viz::write_roi_heatmap_svg(map, out_dir / (stem + ".svg"));
    record.add_artifact(csv_path);
    summary << k << "," << granularity << "," << map.entropy << "\n";
  }
}

std::vector<std::pair<std::uint64_t, fs::path>> indexed_tensors(
    const fs::path& dir, const std::string& prefix) {
  std::vector<std::pair<std::uint64_t, fs::path>> out;
  if (!fs::is_directory(dir)) {
    throw MissingInputError("2afc: " + dir.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() + 4 &&
        name.substr(name.size() - 4) == ".bin") {
      const std::string id_str =
          name.substr(prefix.size(), name.size() - prefix.size() - 4);
      out.emplace_back(std::stoull(id_str), entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int run_gen_data(const CommonOptions& common, const GenDataOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "gen-data");
    data::WorldConfig config;
    if (!opt.config_path.empty()) {
      config = data::world_config_from_json_file(opt.config_path);
    }
    if (opt.seed_set) config.seed = opt.seed;
    record.set_seed(config.seed);
    record.set_config_hash(config.hash());

    data::GroundTruthWorld world = data::generate_world(config);
    data::DatasetManifest manifest = data::emit_dataset(
        world, opt.n_train, opt.n_test, opt.reps_test, opt.out_dir);
    record.add_artifact(opt.out_dir / "manifest.json");
    std::cout << "dataset " << opt.out_dir.string() << ": "
              << manifest.train_ids.size() << " train / "
              << manifest.test_ids.size() << " test stimuli, "
              << manifest.reps_test << " test repetitions, world hash "
              << manifest.world_hash << "\n";
  });
}

int run_gen_captions(const CommonOptions& common,
                     const GenCaptionsOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "gen-captions");
    record.set_seed(opt.seed);
    data::Dataset dataset = data::load_dataset(opt.dataset_dir);

    std::unique_ptr<mimevis::VlmClient> client;
    if (opt.client == "mock") {
      client = std::make_unique<mimevis::MockVlmClient>(opt.seed);
    } else if (opt.client == "http") {
      if (opt.endpoint.empty()) {
        throw ConfigError("gen-captions: --endpoint required with --client http");
      }
      mimevis::HttpVlmClient::Options options;
      options.endpoint = opt.endpoint;
      client = std::make_unique<mimevis::HttpVlmClient>(options);
    } else {
      throw ConfigError("gen-captions: --client must be 'mock' or 'http'");
    }

    const fs::path cache =
        opt.cache_dir.empty() ? opt.out_file.parent_path() / "caption_cache"
                              : opt.cache_dir;
    mimevis::CorpusStats stats = mimevis::synthesize_corpus(
        *client, dataset, opt.out_file, cache, caption_options(opt));
    record.add_artifact(opt.out_file);
    std::cout << "corpus " << opt.out_file.string() << ": " << stats.n_records
              << " records, " << stats.n_captions << " captions, "
              << stats.n_errors << " errors, " << stats.cache_hits
              << " cache hits, " << client->call_count() << " client calls\n";
    if (stats.n_errors > 0) {
      std::cerr << "warning: " << stats.n_errors
                << " stimuli carry error records\n";
    }
  });
}

int run_train(const CommonOptions& common, const TrainOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "train");
    pipeline::TrainConfig config = resolve_train_config(opt);
    record.set_seed(config.seed);
    record.set_config_hash(config.hash());
    std::cout << "training " << pipeline::report_label(config.mode)
              << " (granularity " << config.granularity << ", "
              << common.precision << ")\n";
    if (common.precision == "f64") {
      train_with_precision<double>(opt, config, record);
    } else {
      train_with_precision<float>(opt, config, record);
    }
  });
}

int run_eval(const CommonOptions& common, const EvalOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "eval");
    const std::string precision = pipeline::checkpoint_precision(
        opt.checkpoint_dir, pipeline::kPipelineManifest);
    if (precision == "f64") {
      eval_with_precision<double>(opt, record);
    } else {
      eval_with_precision<float>(opt, record);
    }
    std::cout << "evaluation written to " << opt.out_dir.string() << "\n";
  });
}

int run_roi_map(const CommonOptions& common, const RoiMapOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "roi-map");
    fs::create_directories(opt.out_dir);
    std::ofstream summary(opt.out_dir / "roi_entropy.csv", std::ios::trunc);
    summary << "subject,granularity,entropy_nats\n";
    for (const fs::path& dir : opt.checkpoints) {
      const std::string precision =
          pipeline::checkpoint_precision(dir, pipeline::kPipelineManifest);
      if (precision == "f64") {
        roi_map_with_precision<double>(dir, opt.out_dir, record, summary);
      } else {
        roi_map_with_precision<float>(dir, opt.out_dir, record, summary);
      }
    }
    record.add_artifact(opt.out_dir / "roi_entropy.csv");
    std::cout << "roi maps written to " << opt.out_dir.string() << "\n";
  });
}

int run_2afc(const CommonOptions& common, const TwoAfcOptions& opt) {
  return guard([&]() {
    RunRecord record(common, "2afc");
    record.set_seed(opt.seed);

    auto a_files = indexed_tensors(opt.renders_a, "recon_");
    auto b_files = indexed_tensors(opt.renders_b, "recon_");
    auto o_files = indexed_tensors(opt.originals, "orig_");

    // Intersection of ids present in all three sets, ascending.
    std::map<std::uint64_t, fs::path> b_map(b_files.begin(), b_files.end());
    std::map<std::uint64_t, fs::path> o_map(o_files.begin(), o_files.end());
    std::vector<std::uint64_t> ids;
    std::vector<nn::Tensor<double>> renders_a, renders_b, originals;
    for (const auto& [id, path] : a_files) {
      if (!b_map.count(id) || !o_map.count(id)) continue;
      ids.push_back(id);
      renders_a.push_back(io::read_tensor_f32(path).cast<double>());
      renders_b.push_back(io::read_tensor_f32(b_map[id]).cast<double>());
      originals.push_back(io::read_tensor_f32(o_map[id]).cast<double>());
    }
    if (ids.empty()) {
      throw MissingInputError("2afc: no stimulus ids shared by " +
                              opt.renders_a.string() + ", " +
                              opt.renders_b.string() + " and " +
                              opt.originals.string());
    }

    metrics::FeatureExtractor deep(metrics::ExtractorKind::DeepB);
    std::vector<std::unique_ptr<metrics::Judge>> judges;
    for (std::size_t j = 0; j < opt.judges; ++j) {
      if (opt.judge == "random") {
        judges.push_back(std::make_unique<metrics::RandomJudge>(opt.seed + j));
      } else if (opt.judge == "correlation") {
        judges.push_back(std::make_unique<metrics::CorrelationJudge>(&deep));
      } else {
        throw ConfigError("2afc: --judge must be 'correlation' or 'random'");
      }
    }

    metrics::TwoAfcConfig config;
    config.seed = opt.seed;
    metrics::TwoAfcResult result = metrics::run_2afc(
        config, judges, renders_a, renders_b, originals, ids);

    json j;
    j["rate"] = result.rate;
    j["delta"] = result.delta;
    j["valid_trials"] = result.valid_trials;
    j["sentinel_trials"] = result.sentinel_trials;
    j["excluded_judges"] = result.excluded_judges;
    json trials = json::array();
    for (const auto& t : result.records) {
      trials.push_back({{"judge", t.judge},
                        {"slot", t.slot},
                        {"stimulus_id", t.stimulus_id},
                        {"sentinel", t.sentinel},
                        {"a_shown_first", t.a_shown_first},
                        {"outcome", t.outcome}});
    }
    j["trials"] = trials;
    std::ofstream out(opt.out_file, std::ios::trunc);
    if (!out) throw FormatError("2afc: cannot write " + opt.out_file.string());
    out << j.dump(2) << "\n";
    record.add_artifact(opt.out_file);
    std::cout << "2afc: rate " << result.rate << "% (delta "
              << (result.delta >= 0 ? "+" : "") << result.delta << "), "
              << result.valid_trials << " valid trials, "
              << result.excluded_judges.size() << " judges excluded\n";
  });
}

}  // namespace synmind::cli
