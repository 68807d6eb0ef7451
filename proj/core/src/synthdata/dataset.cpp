#include "synmind/synthdata/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/io/tensor_file.hpp"

namespace synmind::data {

namespace {

using nlohmann::json;

json config_to_json(const WorldConfig& c) {
  return json{{"n_subjects", c.n_subjects}, {"voxel_dims", c.voxel_dims},
              {"scene_dim", c.scene_dim},   {"n_categories", c.n_categories},
              {"image_side", c.image_side}, {"token_count", c.token_count},
              {"token_dim", c.token_dim},   {"noise_sigma", c.noise_sigma},
              {"seed", c.seed}};
}

WorldConfig config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "n_subjects", "voxel_dims", "scene_dim",  "n_categories", "image_side",
      "token_count", "token_dim", "noise_sigma", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("world config: unknown key '" + it.key() + "'");
    }
  }
  WorldConfig c;
  try {
    if (j.contains("n_subjects")) c.n_subjects = j.at("n_subjects").get<std::size_t>();
    if (j.contains("voxel_dims")) c.voxel_dims = j.at("voxel_dims").get<std::vector<std::size_t>>();
    if (j.contains("scene_dim")) c.scene_dim = j.at("scene_dim").get<std::size_t>();
    if (j.contains("n_categories")) c.n_categories = j.at("n_categories").get<std::size_t>();
    if (j.contains("image_side")) c.image_side = j.at("image_side").get<std::size_t>();
    if (j.contains("token_count")) c.token_count = j.at("token_count").get<std::size_t>();
    if (j.contains("token_dim")) c.token_dim = j.at("token_dim").get<std::size_t>();
    if (j.contains("noise_sigma")) c.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world config: ") + e.what());
  }
  c.validate();
  return c;
}

nn::Tensor<float> stack_rows(const std::vector<std::vector<float>>& rows,
                             std::vector<std::size_t> shape) {
  nn::Tensor<float> out(std::move(shape));
  std::size_t off = 0;
  for (const auto& r : rows) {
    std::copy(r.begin(), r.end(), out.data() + off);
    off += r.size();
  }
  return out;
}

void write_named(const std::filesystem::path& dir, DatasetManifest& manifest,
                 const std::string& name, const nn::Tensor<float>& t) {
  const std::string file = name + ".bin";
  io::write_tensor_f32(dir / file, t);
  manifest.tensor_paths[name] = file;
}

nn::Tensor<float> read_named(const std::filesystem::path& dir,
                             const DatasetManifest& manifest,
                             const std::string& name) {
  auto it = manifest.tensor_paths.find(name);
  if (it == manifest.tensor_paths.end()) {
    throw FormatError("dataset manifest: missing tensor entry '" + name + "'");
  }
  return io::read_tensor_f32(dir / it->second);
}

void check_dims(const nn::Tensor<float>& t, std::vector<std::size_t> expect,
                const std::string& name) {
  if (t.shape() != expect) {
    throw FormatError("dataset tensor '" + name + "': dimension mismatch, got " +
                      t.shape_string() + " expected " +
                      nn::Tensor<float>::shape_string(expect));
  }
}

}  // namespace

std::vector<float> Dataset::averaged_test_voxels(std::size_t subject,
                                                 std::size_t test_index) const {
  const nn::Tensor<float>& v = test_voxels[subject];
  const std::size_t reps = v.dim(1);
  const std::size_t z = v.dim(2);
  std::vector<float> out(z, 0.0f);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < z; ++i) out[i] += v.at(test_index, r, i);
  }
  for (float& x : out) x /= static_cast<float>(reps);
  return out;
}

std::vector<std::string> Dataset::object_names(const nn::Tensor<float>& labels,
                                               std::size_t row) const {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < labels.dim(1); ++c) {
    if (labels.at(row, c) > 0.5f) names.push_back(manifest.category_names[c]);
  }
  return names;
}

DatasetManifest emit_dataset(const GroundTruthWorld& world, std::size_t n_train,
                             std::size_t n_test, std::size_t reps_test,
                             const std::filesystem::path& dir) {
  if (n_train == 0 || n_test == 0 || reps_test == 0) {
    throw ConfigError("emit_dataset: n_train, n_test, reps_test must be >= 1");
  }
  std::filesystem::create_directories(dir);
  const WorldConfig& cfg = world.config;

  DatasetManifest manifest;
  manifest.world_hash = cfg.hash();
  manifest.config = cfg;
  manifest.reps_test = reps_test;
  manifest.category_names = world.category_names;
  for (std::size_t i = 0; i < n_train; ++i) manifest.train_ids.push_back(i);
  for (std::size_t i = 0; i < n_test; ++i) {
    manifest.test_ids.push_back(n_train + i);
  }

  const std::size_t side = cfg.image_side;
  const std::size_t m = cfg.n_categories;
  const std::size_t tok = cfg.token_count * cfg.token_dim;
  const std::size_t g = cfg.scene_dim;

  auto emit_split = [&](const std::vector<std::uint64_t>& ids,
                        std::size_t reps, const std::string& prefix) {
    const std::size_t n = ids.size();
    nn::Tensor<float> pixels({n, side, side});
    nn::Tensor<float> labels({n, m});
    nn::Tensor<float> targets({n, cfg.token_count, cfg.token_dim});
    nn::Tensor<float> scenes({n, g});
    std::vector<nn::Tensor<float>> voxels;
    for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
      if (reps == 1) {
        voxels.emplace_back(std::vector<std::size_t>{n, cfg.voxel_dims[k]});
      } else {
        voxels.emplace_back(
            std::vector<std::size_t>{n, reps, cfg.voxel_dims[k]});
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t r = 0; r < reps; ++r) {
        auto [st, samples] = synthesize_sample(world, ids[i], r);
        if (r == 0) {
          std::copy(st.pixels.data(), st.pixels.data() + side * side,
                    pixels.data() + i * side * side);
          std::copy(st.labels.begin(), st.labels.end(), labels.data() + i * m);
          std::copy(st.semantic_target.data(), st.semantic_target.data() + tok,
                    targets.data() + i * tok);
          std::copy(st.scene.begin(), st.scene.end(), scenes.data() + i * g);
        }
        for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
          const std::size_t z = cfg.voxel_dims[k];
          float* dst = voxels[k].data() + (i * reps + r) * z;
          std::copy(samples[k].voxels.begin(), samples[k].voxels.end(), dst);
        }
      }
    }
    write_named(dir, manifest, prefix + "_pixels", pixels);
    write_named(dir, manifest, prefix + "_labels", labels);
    write_named(dir, manifest, prefix + "_targets", targets);
    write_named(dir, manifest, prefix + "_scenes", scenes);
    for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
      write_named(dir, manifest, prefix + "_voxels_s" + std::to_string(k),
                  voxels[k]);
    }
  };

  emit_split(manifest.train_ids, 1, "train");
  emit_split(manifest.test_ids, reps_test, "test");

  json j;
  j["schema_version"] = manifest.schema_version;
  j["world_hash"] = manifest.world_hash;
  j["config"] = config_to_json(cfg);
  j["train_ids"] = manifest.train_ids;
  j["test_ids"] = manifest.test_ids;
  j["reps_test"] = manifest.reps_test;
  j["tensors"] = manifest.tensor_paths;
  j["category_names"] = manifest.category_names;

  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("emit_dataset: cannot write manifest.json");
  return manifest;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw MissingInputError("dataset: cannot open " + manifest_path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset manifest: parse error: ") + e.what());
  }

  Dataset ds;
  DatasetManifest& m = ds.manifest;
  if (!j.contains("schema_version")) {
    throw FormatError("dataset manifest: missing field 'schema_version'");
  }
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != 1) {
    throw FormatError("dataset manifest: unsupported schema_version " +
                      std::to_string(m.schema_version));
  }
  try {
    m.world_hash = j.at("world_hash").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.train_ids = j.at("train_ids").get<std::vector<std::uint64_t>>();
    m.test_ids = j.at("test_ids").get<std::vector<std::uint64_t>>();
    m.reps_test = j.at("reps_test").get<std::size_t>();
    m.tensor_paths =
        j.at("tensors").get<std::map<std::string, std::string>>();
    m.category_names = j.at("category_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset manifest: ") + e.what());
  }

  std::set<std::uint64_t> train_set(m.train_ids.begin(), m.train_ids.end());
  for (std::uint64_t id : m.test_ids) {
    if (train_set.count(id)) {
      throw FormatError("dataset manifest: stimulus id " + std::to_string(id) +
                        " appears in both train_ids and test_ids");
    }
  }
  if (m.category_names.size() != m.config.n_categories) {
    throw FormatError("dataset manifest: category_names length mismatch");
  }

  const WorldConfig& cfg = m.config;
  const std::size_t nt = m.train_ids.size();
  const std::size_t ns = m.test_ids.size();

  ds.train_pixels = read_named(dir, m, "train_pixels");
  ds.train_labels = read_named(dir, m, "train_labels");
  ds.train_targets = read_named(dir, m, "train_targets");
  ds.train_scenes = read_named(dir, m, "train_scenes");
  ds.test_pixels = read_named(dir, m, "test_pixels");
  ds.test_labels = read_named(dir, m, "test_labels");
  ds.test_targets = read_named(dir, m, "test_targets");
  ds.test_scenes = read_named(dir, m, "test_scenes");

  check_dims(ds.train_pixels, {nt, cfg.image_side, cfg.image_side}, "train_pixels");
  check_dims(ds.train_labels, {nt, cfg.n_categories}, "train_labels");
  check_dims(ds.train_targets, {nt, cfg.token_count, cfg.token_dim}, "train_targets");
  check_dims(ds.train_scenes, {nt, cfg.scene_dim}, "train_scenes");
  check_dims(ds.test_pixels, {ns, cfg.image_side, cfg.image_side}, "test_pixels");
  check_dims(ds.test_labels, {ns, cfg.n_categories}, "test_labels");
  check_dims(ds.test_targets, {ns, cfg.token_count, cfg.token_dim}, "test_targets");
  check_dims(ds.test_scenes, {ns, cfg.scene_dim}, "test_scenes");

  for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
    ds.train_voxels.push_back(
        read_named(dir, m, "train_voxels_s" + std::to_string(k)));
    check_dims(ds.train_voxels.back(), {nt, cfg.voxel_dims[k]},
               "train_voxels_s" + std::to_string(k));
    ds.test_voxels.push_back(
        read_named(dir, m, "test_voxels_s" + std::to_string(k)));
    if (m.reps_test == 1) {
      check_dims(ds.test_voxels.back(), {ns, cfg.voxel_dims[k]},
                 "test_voxels_s" + std::to_string(k));
      ds.test_voxels.back() =
          ds.test_voxels.back().reshaped({ns, 1, cfg.voxel_dims[k]});
    } else {
      check_dims(ds.test_voxels.back(), {ns, m.reps_test, cfg.voxel_dims[k]},
                 "test_voxels_s" + std::to_string(k));
    }
  }
  return ds;
}

WorldConfig world_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world config: parse error: ") + e.what());
  }
  return config_from_json(j);
}

std::string world_config_to_json_text(const WorldConfig& config) {
  return config_to_json(config).dump();
}

WorldConfig world_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingInputError("world config: cannot open " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return world_config_from_json_text(text);
}

}  // namespace synmind::data
