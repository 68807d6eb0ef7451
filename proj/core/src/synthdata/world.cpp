#include "synmind/synthdata/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "synmind/common/errors.hpp"
#include "synmind/common/hash.hpp"
#include "synmind/common/rng.hpp"

namespace synmind::data {

namespace {

// 80th percentile of the standard normal; calibrates 20% label prevalence.
constexpr double kLabelQuantile = 0.8416212335729143;

const char* kCocoNames[] = {
    "person",        "bicycle",      "car",           "motorcycle",
    "airplane",      "bus",          "train",         "truck",
    "boat",          "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench",        "bird",          "cat",
    "dog",           "horse",        "sheep",         "cow",
    "elephant",      "bear",         "zebra",         "giraffe",
    "backpack",      "umbrella",     "handbag",       "tie",
    "suitcase",      "frisbee",      "skis",          "snowboard",
    "sports ball",   "kite",         "baseball bat",  "baseball glove",
    "skateboard",    "surfboard",    "tennis racket", "bottle",
    "wine glass",    "cup",          "fork",          "knife",
    "spoon",         "bowl",         "banana",        "apple",
    "sandwich",      "orange",       "broccoli",      "carrot",
    "hot dog",       "pizza",        "donut",         "cake",
    "chair",         "couch",        "potted plant",  "bed",
    "dining table",  "toilet",       "tv",            "laptop",
    "mouse",         "remote",       "keyboard",      "cell phone",
    "microwave",     "oven",         "toaster",       "sink",
    "refrigerator",  "book",         "clock",         "vase",
    "scissors",      "teddy bear",   "hair drier",    "toothbrush"};
constexpr std::size_t kCocoNameCount = sizeof(kCocoNames) / sizeof(char*);

nn::Tensor<double> gaussian_matrix(std::size_t rows, std::size_t cols,
                                   CounterRng rng, double std_dev) {
  nn::Tensor<double> m({rows, cols});
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = rng.next_gaussian() * std_dev;
  }
  return m;
}

}  // namespace

void WorldConfig::validate() const {
  if (n_subjects < 1) throw ConfigError("world config: n_subjects must be >= 1");
  if (voxel_dims.size() != n_subjects) {
    throw ConfigError("world config: voxel_dims must list one entry per subject (" +
                      std::to_string(voxel_dims.size()) + " vs " +
                      std::to_string(n_subjects) + ")");
  }
  for (std::size_t z : voxel_dims) {
    if (z < 1) throw ConfigError("world config: voxel_dims entries must be >= 1");
  }
  if (scene_dim < 1) throw ConfigError("world config: scene_dim must be >= 1");
  if (n_categories < 1) throw ConfigError("world config: n_categories must be >= 1");
  if (image_side < 1) throw ConfigError("world config: image_side must be >= 1");
  if (token_count < 1) throw ConfigError("world config: token_count must be >= 1");
  if (token_dim < 1) throw ConfigError("world config: token_dim must be >= 1");
  if (noise_sigma < 0.0) throw ConfigError("world config: noise_sigma must be >= 0");
}

std::size_t WorldConfig::appearance_dims() const {
  if (scene_dim <= 1) return 0;
  return std::min(scene_dim - 1, scene_dim / 6);
}

std::string WorldConfig::canonical_json() const {
  std::ostringstream os;
  os << "{\"image_side\":" << image_side << ",\"n_categories\":" << n_categories
     << ",\"n_subjects\":" << n_subjects << ",\"noise_sigma\":" << noise_sigma
     << ",\"scene_dim\":" << scene_dim << ",\"seed\":" << seed
     << ",\"token_count\":" << token_count << ",\"token_dim\":" << token_dim
     << ",\"voxel_dims\":[";
  for (std::size_t i = 0; i < voxel_dims.size(); ++i) {
    if (i) os << ",";
    os << voxel_dims[i];
  }
  os << "]}";
  return os.str();
}

std::string WorldConfig::hash() const { return hash_hex(canonical_json()); }

GroundTruthWorld generate_world(const WorldConfig& config) {
  config.validate();
  GroundTruthWorld world;
  world.config = config;

  const std::size_t g = config.scene_dim;
  const std::size_t g_sem = config.semantic_dims();
  const std::size_t g_app = config.appearance_dims();
  CounterRng root(config.seed);

  for (std::size_t k = 0; k < config.n_subjects; ++k) {
    world.mixing.push_back(gaussian_matrix(config.voxel_dims[k], g,
                                           root.fork("mixing").fork(k),
                                           1.0 / std::sqrt(static_cast<double>(g))));
  }

  // Teacher tokens read only the semantic block; pre-tanh std ~0.8.
  const std::size_t tok = config.token_count * config.token_dim;
  world.sem_weight = nn::Tensor<double>({tok, g});
  {
    CounterRng rng = root.fork("sem_weight");
    const double std_dev = 0.8 / std::sqrt(static_cast<double>(g_sem));
    for (std::size_t r = 0; r < tok; ++r) {
      for (std::size_t c = 0; c < g_sem; ++c) {
        world.sem_weight.at(r, c) = rng.next_gaussian() * std_dev;
      }
    }
  }
  world.sem_bias = nn::Tensor<double>({tok});
  {
    CounterRng rng = root.fork("sem_bias");
    for (std::size_t r = 0; r < tok; ++r) {
      world.sem_bias[r] = rng.next_gaussian() * 0.2;
    }
  }

  // Pixels read both blocks: ~65% of pre-clamp variance from semantics,
  // ~35% from appearance, total pixel std ~0.2 around mid-gray.
  const std::size_t px = config.image_side * config.image_side;
  world.img_weight = nn::Tensor<double>({px, g});
  {
    CounterRng rng = root.fork("img_weight");
    const double app_share = g_app > 0 ? 0.35 : 0.0;
    const double sem_std = std::sqrt(0.04 * (1.0 - app_share) / g_sem);
    const double app_std =
        g_app > 0 ? std::sqrt(0.04 * app_share / g_app) : 0.0;
    for (std::size_t r = 0; r < px; ++r) {
      for (std::size_t c = 0; c < g; ++c) {
        const double sd = c < g_sem ? sem_std : app_std;
        world.img_weight.at(r, c) = rng.next_gaussian() * sd;
      }
    }
  }
  world.img_bias = nn::Tensor<double>::full({px}, 0.5);

  world.label_weight = nn::Tensor<double>({config.n_categories, g});
  world.label_threshold = nn::Tensor<double>({config.n_categories});
  {
    CounterRng rng = root.fork("label_weight");
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(g_sem));
    for (std::size_t c = 0; c < config.n_categories; ++c) {
      double norm_sq = 0.0;
      for (std::size_t s = 0; s < g_sem; ++s) {
        const double w = rng.next_gaussian() * std_dev;
        world.label_weight.at(c, s) = w;
        norm_sq += w * w;
      }
      world.label_threshold[c] = std::sqrt(norm_sq) * kLabelQuantile;
    }
  }

  for (std::size_t c = 0; c < config.n_categories; ++c) {
    if (c < kCocoNameCount) {
      world.category_names.emplace_back(kCocoNames[c]);
    } else {
      world.category_names.push_back("object" + std::to_string(c));
    }
  }
  return world;
}

std::vector<double> GroundTruthWorld::scene_code(std::uint64_t scene_seed) const {
  CounterRng rng = CounterRng(config.seed).fork("scene").fork(scene_seed);
  std::vector<double> s(config.scene_dim);
  for (double& v : s) v = rng.next_gaussian();
  return s;
}

std::vector<double> GroundTruthWorld::clean_voxels(
    std::size_t subject, const std::vector<double>& scene) const {
  const nn::Tensor<double>& a = mixing[subject];
  std::vector<double> x(a.dim(0), 0.0);
  for (std::size_t i = 0; i < a.dim(0); ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.dim(1); ++c) acc += a.at(i, c) * scene[c];
    x[i] = acc;
  }
  return x;
}

Stimulus synthesize_stimulus(const GroundTruthWorld& world,
                             std::uint64_t scene_seed) {
  const WorldConfig& cfg = world.config;
  const std::vector<double> s = world.scene_code(scene_seed);

  Stimulus st;
  st.id = scene_seed;
  st.scene.assign(s.begin(), s.end());

  const std::size_t px = cfg.image_side * cfg.image_side;
  st.pixels = nn::Tensor<float>({cfg.image_side, cfg.image_side});
  for (std::size_t p = 0; p < px; ++p) {
    double v = world.img_bias[p];
    for (std::size_t c = 0; c < cfg.scene_dim; ++c) {
      v += world.img_weight.at(p, c) * s[c];
    }
    st.pixels[p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }

  st.semantic_target = nn::Tensor<float>({cfg.token_count, cfg.token_dim});
  for (std::size_t r = 0; r < st.semantic_target.size(); ++r) {
    double v = world.sem_bias[r];
    for (std::size_t c = 0; c < cfg.scene_dim; ++c) {
      v += world.sem_weight.at(r, c) * s[c];
    }
    st.semantic_target[r] = static_cast<float>(std::tanh(v));
  }

  st.labels.assign(cfg.n_categories, 0.0f);
  std::size_t active = 0;
  std::size_t argmax = 0;
  double best = -1e300;
  for (std::size_t c = 0; c < cfg.n_categories; ++c) {
    double score = 0.0;
    for (std::size_t d = 0; d < cfg.scene_dim; ++d) {
      score += world.label_weight.at(c, d) * s[d];
    }
    score -= world.label_threshold[c];
    if (score > best) {
      best = score;
      argmax = c;
    }
    if (score > 0.0) {
      st.labels[c] = 1.0f;
      ++active;
    }
  }
  if (active == 0) st.labels[argmax] = 1.0f;  // every stimulus has >= 1 label
  return st;
}

std::pair<Stimulus, std::vector<FmriSample>> synthesize_sample(
    const GroundTruthWorld& world, std::uint64_t scene_seed,
    std::uint32_t repetition) {
  Stimulus st = synthesize_stimulus(world, scene_seed);
  const std::vector<double> s = world.scene_code(scene_seed);

  std::vector<FmriSample> samples;
  samples.reserve(world.config.n_subjects);
  for (std::size_t k = 0; k < world.config.n_subjects; ++k) {
    std::vector<double> clean = world.clean_voxels(k, s);
    CounterRng noise = CounterRng(world.config.seed)
                           .fork("voxel_noise")
                           .fork(scene_seed)
                           .fork(k)
                           .fork(repetition);
    FmriSample sample;
    sample.subject = k;
    sample.stimulus_id = scene_seed;
    sample.repetition = repetition;
    sample.voxels.resize(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
      sample.voxels[i] = static_cast<float>(
          clean[i] + world.config.noise_sigma * noise.next_gaussian());
    }
    samples.push_back(std::move(sample));
  }
  return {std::move(st), std::move(samples)};
}

FmriSample average_test_repetitions(const std::vector<FmriSample>& samples) {
  if (samples.empty()) {
    throw InvariantError("average_test_repetitions: empty sample list");
  }
  const FmriSample& first = samples.front();
  for (const FmriSample& s : samples) {
    if (s.subject != first.subject || s.stimulus_id != first.stimulus_id) {
      throw InvariantError(
          "average_test_repetitions: mixed subject or stimulus ids");
    }
    if (s.voxels.size() != first.voxels.size()) {
      throw InvariantError("average_test_repetitions: voxel length mismatch");
    }
  }
  FmriSample out;
  out.subject = first.subject;
  out.stimulus_id = first.stimulus_id;
  out.repetition = kAveragedRepetition;
  out.voxels.assign(first.voxels.size(), 0.0f);
  for (const FmriSample& s : samples) {
    for (std::size_t i = 0; i < s.voxels.size(); ++i) out.voxels[i] += s.voxels[i];
  }
  const float inv = 1.0f / static_cast<float>(samples.size());
  for (float& v : out.voxels) v *= inv;
  return out;
}

}  // namespace synmind::data
