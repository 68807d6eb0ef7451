#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synmind: synthetic brain-to-image semantic decoding pipeline"};
  app.set_version_flag("--version", synmind::cli::kToolVersion);
  app.require_subcommand(1);

  synmind::cli::CommonOptions common;
  app.add_option("--precision", common.precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--run-log", common.run_log, "run log path (JSON lines)");
  app.add_option("--threads", common.threads, "worker threads where applicable");

  synmind::cli::GenDataOptions gen_data;
  auto* cmd_gen_data =
      app.add_subcommand("gen-data", "generate a synthetic dataset");
  cmd_gen_data->add_option("--config", gen_data.config_path,
                           "world config JSON (defaults when omitted)");
  cmd_gen_data->add_option("--out", gen_data.out_dir, "output directory")
      ->required();
  cmd_gen_data->add_option("--n-train", gen_data.n_train, "training stimuli");
  cmd_gen_data->add_option("--n-test", gen_data.n_test, "test stimuli");
  cmd_gen_data->add_option("--reps-test", gen_data.reps_test,
                           "repetitions per test stimulus");
  auto* gen_seed = cmd_gen_data->add_option("--seed", gen_data.seed,
                                            "override the config seed");
  cmd_gen_data->callback([&]() { gen_data.seed_set = gen_seed->count() > 0; });

  synmind::cli::GenCaptionsOptions gen_captions;
  auto* cmd_captions =
      app.add_subcommand("gen-captions", "synthesize the caption corpus");
  cmd_captions->add_option("--dataset", gen_captions.dataset_dir, "dataset dir")
      ->required();
  cmd_captions->add_option("--out", gen_captions.out_file, "corpus JSONL path")
      ->required();
  cmd_captions->add_option("--cache", gen_captions.cache_dir, "cache directory");
  cmd_captions->add_option("--client", gen_captions.client, "mock or http")
      ->check(CLI::IsMember({"mock", "http"}));
  cmd_captions->add_option("--endpoint", gen_captions.endpoint,
                           "http client endpoint URL");
  cmd_captions->add_option("--budget-list", gen_captions.budgets,
                           "word budgets (default 30 45 60 75)");
  cmd_captions->add_option("--seed", gen_captions.seed, "mock client seed");
  cmd_captions->add_option("--template-dir", gen_captions.template_dir,
                           "directory with round_one.txt / round_two.txt");
  cmd_captions->add_option("--max-inflight", gen_captions.max_inflight,
                           "concurrent client requests");

  synmind::cli::TrainOptions train;
  auto* cmd_train = app.add_subcommand("train", "train the decoding pipeline");
  cmd_train->add_option("--dataset", train.dataset_dir, "dataset dir")
      ->required();
  cmd_train->add_option("--corpus", train.corpus_file, "caption corpus")
      ->required();
  cmd_train->add_option("--out", train.out_dir, "checkpoint directory")
      ->required();
  cmd_train->add_option("--config", train.config_path, "train config JSON");
  cmd_train->add_option("--mode", train.mode, "full or semantic_only")
      ->check(CLI::IsMember({"full", "semantic_only", ""}));
  cmd_train->add_option("--granularity", train.granularity,
                        "caption granularity: cc, 30, 45, 60 or 75");
  auto* train_seed = cmd_train->add_option("--seed", train.seed, "train seed");
  cmd_train->add_option("--epochs", train.epochs, "override epochs");
  cmd_train->add_option("--batch-size", train.batch_size, "override batch size");
  cmd_train->add_flag(
      "--mixco,!--no-mixco",
      [&](std::int64_t count) { train.mixco = count > 0 ? 1 : 0; },
      "toggle MixCo augmentation");
  cmd_train->add_option("--freeze", train.freeze,
                        "comma list of frozen stages (swm,sse,ssv)");
  cmd_train->add_flag("--skip-renderer", train.skip_renderer,
                      "do not train the decoder renderer");
  cmd_train->add_flag("--renderer-teacher-forcing",
                      train.renderer_teacher_forcing,
                      "train the renderer on ground-truth targets");
  cmd_train->add_option("--renderer-epochs", train.renderer_epochs,
                        "decoder training epochs");
  cmd_train->callback([&]() { train.seed_set = train_seed->count() > 0; });

  synmind::cli::EvalOptions eval;
  auto* cmd_eval = app.add_subcommand("eval", "run the evaluation battery");
  cmd_eval->add_option("--checkpoint", eval.checkpoint_dir, "pipeline checkpoint")
      ->required();
  cmd_eval->add_option("--renderer", eval.renderer_dir,
                       "renderer checkpoint (defaults to --checkpoint)");
  cmd_eval->add_option("--dataset", eval.dataset_dir, "dataset dir")->required();
  cmd_eval->add_option("--corpus", eval.corpus_file, "caption corpus")
      ->required();
  cmd_eval->add_option("--out", eval.out_dir, "report directory")->required();

  synmind::cli::RoiMapOptions roi;
  auto* cmd_roi = app.add_subcommand("roi-map", "voxel-importance maps");
  cmd_roi->add_option("--checkpoint", roi.checkpoints,
                      "pipeline checkpoints (one per granularity)")
      ->required();
  cmd_roi->add_option("--out", roi.out_dir, "output directory")->required();

  synmind::cli::TwoAfcOptions twoafc;
  auto* cmd_2afc =
      app.add_subcommand("2afc", "two-alternative forced-choice study");
  cmd_2afc->add_option("--renders-a", twoafc.renders_a, "method A render dir")
      ->required();
  cmd_2afc->add_option("--renders-b", twoafc.renders_b, "method B render dir")
      ->required();
  cmd_2afc->add_option("--originals", twoafc.originals, "original image dir")
      ->required();
  cmd_2afc->add_option("--out", twoafc.out_file, "result JSON path")->required();
  cmd_2afc->add_option("--judge", twoafc.judge, "correlation or random")
      ->check(CLI::IsMember({"correlation", "random"}));
  cmd_2afc->add_option("--judges", twoafc.judges, "number of judge instances");
  cmd_2afc->add_option("--seed", twoafc.seed, "session seed");

  CLI11_PARSE(app, argc, argv);

  if (cmd_gen_data->parsed()) return synmind::cli::run_gen_data(common, gen_data);
  if (cmd_captions->parsed()) {
    return synmind::cli::run_gen_captions(common, gen_captions);
  }
  if (cmd_train->parsed()) return synmind::cli::run_train(common, train);
  if (cmd_eval->parsed()) return synmind::cli::run_eval(common, eval);
  if (cmd_roi->parsed()) return synmind::cli::run_roi_map(common, roi);
  if (cmd_2afc->parsed()) return synmind::cli::run_2afc(common, twoafc);
  return 1;
}
