#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synmind::cli {

constexpr const char* kToolVersion = "0.1.0";

struct CommonOptions {
  std::string precision = "f32";  // f32 | f64
  std::filesystem::path run_log = "runs.jsonl";
  int threads = 1;
};

struct GenDataOptions {
  std::filesystem::path config_path;  // empty -> defaults
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t n_train = 2000;
  std::size_t n_test = 200;
  std::size_t reps_test = 3;
};

struct GenCaptionsOptions {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_file;
  std::filesystem::path cache_dir;
  std::string client = "mock";  // mock | http
  std::string endpoint;
  std::vector<std::size_t> budgets = {30, 45, 60, 75};
  std::uint64_t seed = 0;
  std::filesystem::path template_dir;
  std::size_t max_inflight = 4;
};

struct TrainOptions {
  std::filesystem::path dataset_dir;
  std::filesystem::path corpus_file;
  std::filesystem::path out_dir;
  std::filesystem::path config_path;  // empty -> defaults
  std::string mode;                   // empty -> config value
  std::string granularity;            // empty -> config value
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t epochs = 0;      // 0 -> config value
  std::size_t batch_size = 0;  // 0 -> config value
  int mixco = -1;              // -1 keep, 0 off, 1 on
  std::string freeze;          // comma list
  bool skip_renderer = false;
  bool renderer_teacher_forcing = false;
  std::size_t renderer_epochs = 200;
};

struct EvalOptions {
  std::filesystem::path checkpoint_dir;
  std::filesystem::path renderer_dir;  // empty -> checkpoint_dir
  std::filesystem::path dataset_dir;
  std::filesystem::path corpus_file;
  std::filesystem::path out_dir;
};

struct RoiMapOptions {
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path out_dir;
};

struct TwoAfcOptions {
  std::filesystem::path renders_a;
  std::filesystem::path renders_b;
  std::filesystem::path originals;
  std::filesystem::path out_file;
  std::string judge = "correlation";  // correlation | random
  std::size_t judges = 3;
  std::uint64_t seed = 0;
};

int run_gen_data(const CommonOptions& common, const GenDataOptions& opt);
int run_gen_captions(const CommonOptions& common, const GenCaptionsOptions& opt);
int run_train(const CommonOptions& common, const TrainOptions& opt);
int run_eval(const CommonOptions& common, const EvalOptions& opt);
int run_roi_map(const CommonOptions& common, const RoiMapOptions& opt);
int run_2afc(const CommonOptions& common, const TwoAfcOptions& opt);

}  // namespace synmind::cli
