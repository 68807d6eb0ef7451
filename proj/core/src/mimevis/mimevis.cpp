#include "synmind/mimevis/mimevis.hpp"

#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>

#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/common/hash.hpp"
#include "synmind/common/rng.hpp"
#include "synmind/common/text.hpp"

namespace synmind::mimevis {

namespace {

using nlohmann::json;

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

json report_to_json(const ValidationReport& r) {
  return json{{"word_count", r.word_count},
              {"budget", r.budget},
              {"grounding_overlap", r.grounding_overlap},
              {"passed", r.passed}};
}

ValidationReport report_from_json(const json& j) {
  ValidationReport r;
  r.word_count = j.at("word_count").get<std::size_t>();
  r.budget = j.at("budget").get<std::size_t>();
  r.grounding_overlap = j.at("grounding_overlap").get<double>();
  r.passed = j.at("passed").get<bool>();
  return r;
}

std::string cache_key(std::uint64_t stimulus_id, const std::string& slot,
                      const std::string& template_hash,
                      const std::string& client_id) {
  return std::to_string(stimulus_id) + "|" + slot + "|" + template_hash + "|" +
         client_id;
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.round_one =
      "You are shown an image. Give a complete free-form description of it. "
      "Cover basic attributes such as brightness, color, texture, shape and "
      "position, name every visible object, describe the scene type, and add "
      "any affective impression the image gives.";
  t.round_two =
      "Here is your earlier description of the image:\n{round1}\n\n"
      "Reference caption: {reference}\n\n"
      "Rewrite your description as a single caption. It must stay consistent "
      "with the meaning of the reference caption and mention its key objects. "
      "Use at most {budget} visual words.{violation}";
  return t;
}

PromptTemplates PromptTemplates::from_directory(
    const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  auto read_if_present = [&](const char* name, std::string& slot) {
    std::ifstream in(dir / name);
    if (in) {
      slot.assign((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
    }
  };
  read_if_present("round_one.txt", t.round_one);
  read_if_present("round_two.txt", t.round_two);
  return t;
}

std::string PromptTemplates::hash() const {
  return hash_hex(fnv1a64(round_one) ^ mix_u64(fnv1a64(round_two)));
}

ValidationReport validate_caption(const std::string& caption,
                                  const std::string& reference_caption,
                                  std::size_t budget, double tau_ground) {
  ValidationReport r;
  r.word_count = text::word_count(caption);
  r.budget = budget;
  r.grounding_overlap = text::content_overlap(caption, reference_caption);
  r.passed = r.word_count <= budget && r.grounding_overlap >= tau_ground;
  return r;
}

std::string reference_caption(const std::vector<std::string>& object_names) {
  if (object_names.empty()) return "";
  std::ostringstream os;
  os << "a photo of ";
  for (std::size_t i = 0; i < object_names.size(); ++i) {
    if (i > 0) os << (i + 1 == object_names.size() ? " and " : ", ");
    const std::string& n = object_names[i];
    const bool vowel =
        !n.empty() && std::string("aeiou").find(n[0]) != std::string::npos;
    os << (vowel ? "an " : "a ") << n;
  }
  return os.str();
}

std::string round_one_describe(VlmClient& client,
                               const nn::Tensor<float>& stimulus_image,
                               const std::vector<std::string>& object_names,
                               const PromptTemplates& templates) {
  ChatRequest req;
  req.round = 1;
  req.prompt = templates.round_one;
  req.object_names = object_names;
  req.image = &stimulus_image;
  ChatResponse res = client.chat(req);
  if (res.text.empty()) {
    throw CaptionError("round one: client returned an empty description");
  }
  return res.text;
}

CondenseResult round_two_condense(VlmClient& client,
                                  const std::string& raw_description,
                                  const std::string& reference,
                                  std::size_t budget,
                                  const MimevisOptions& options) {
  if (text::word_count(reference) == 0) {
    throw CaptionError("round two: reference caption is empty");
  }

  std::string violation;
  for (int attempt = 0; attempt <= options.reprompt_attempts; ++attempt) {
    ChatRequest req;
    req.round = 2;
    req.prompt = replace_all(
        replace_all(
            replace_all(
                replace_all(options.templates.round_two, "{round1}",
                            raw_description),
                "{reference}", reference),
            "{budget}", std::to_string(budget)),
        "{violation}",
        violation.empty() ? "" : "\nYour previous attempt failed: " + violation);
    req.reference_caption = reference;
    req.word_budget = budget;
    req.prior_text = raw_description;
    req.violation = violation;

    ChatResponse res = client.chat(req);
    ValidationReport report =
        validate_caption(res.text, reference, budget, options.tau_ground);
    if (report.passed) return {res.text, report, false};

    std::ostringstream why;
    if (report.word_count > budget) {
      why << "used " << report.word_count << " words, budget is " << budget
          << ". ";
    }
    if (report.grounding_overlap < options.tau_ground) {
      why << "dropped reference content (overlap "
          << report.grounding_overlap << " < " << options.tau_ground << ").";
    }
    violation = why.str();
  }

  // Deterministic fallback: truncate the round-one text to the budget.
  std::string truncated = text::truncate_words(raw_description, budget);
  ValidationReport report =
      validate_caption(truncated, reference, budget, options.tau_ground);
  return {truncated, report, true};
}

CorpusStats synthesize_corpus(VlmClient& client, const data::Dataset& dataset,
                              const std::filesystem::path& corpus_file,
                              const std::filesystem::path& cache_dir,
                              const MimevisOptions& options) {
  CaptionCache cache(cache_dir);
  const std::string template_hash = options.templates.hash();
  const std::string client_id = client.id();

  struct Work {
    std::uint64_t id;
    std::vector<std::string> objects;
    nn::Tensor<float> pixels;
  };
  std::vector<Work> work;
  auto queue_split = [&](const std::vector<std::uint64_t>& ids,
                         const nn::Tensor<float>& labels,
                         const nn::Tensor<float>& pixels) {
    const std::size_t side = dataset.manifest.config.image_side;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Work w;
      w.id = ids[i];
      w.objects = dataset.object_names(labels, i);
      w.pixels = nn::Tensor<float>({side, side});
      std::copy(pixels.data() + i * side * side,
                pixels.data() + (i + 1) * side * side, w.pixels.data());
      work.push_back(std::move(w));
    }
  };
  queue_split(dataset.manifest.train_ids, dataset.train_labels,
              dataset.train_pixels);
  queue_split(dataset.manifest.test_ids, dataset.test_labels,
              dataset.test_pixels);

  CorpusStats stats;
  std::vector<CaptionSet> results(work.size());
  std::atomic<std::size_t> cache_hits{0};
  std::atomic<std::size_t> next{0};

  auto process_one = [&](std::size_t wi) {
    const Work& w = work[wi];
    CaptionSet set;
    set.stimulus_id = w.id;
    set.client_id = client_id;
    set.prompt_hash = template_hash;
    set.v_cc = reference_caption(w.objects);
    try {
      if (set.v_cc.empty()) {
        throw CaptionError("stimulus " + std::to_string(w.id) +
                           ": no object names for a reference caption");
      }
      // Round one, cached under the pseudo-slot "r1".
      const std::string r1_key =
          cache_key(w.id, "r1", template_hash, client_id);
      std::string raw;
      if (auto hit = cache.get(r1_key)) {
        raw = json::parse(*hit).at("text").get<std::string>();
        cache_hits.fetch_add(1);
      } else {
        raw = round_one_describe(client, w.pixels, w.objects,
                                 options.templates);
        cache.put(r1_key, json{{"text", raw}}.dump());
      }

      for (std::size_t budget : options.budgets) {
        const std::string slot = std::to_string(budget);
        const std::string key = cache_key(w.id, slot, template_hash, client_id);
        if (auto hit = cache.get(key)) {
          json j = json::parse(*hit);
          set.captions[slot] = j.at("caption").get<std::string>();
          set.reports[slot] = report_from_json(j.at("report"));
          cache_hits.fetch_add(1);
          continue;
        }
        CondenseResult res =
            round_two_condense(client, raw, set.v_cc, budget, options);
        set.captions[slot] = res.caption;
        set.reports[slot] = res.report;
        cache.put(key, json{{"caption", res.caption},
                            {"report", report_to_json(res.report)}}
                           .dump());
      }
    } catch (const std::exception& e) {
      set.error = e.what();
    }
    results[wi] = std::move(set);
  };

  const std::size_t n_workers =
      std::min<std::size_t>(std::max<std::size_t>(options.max_inflight, 1),
                            work.size() == 0 ? 1 : work.size());
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < work.size(); ++i) process_one(i);
  } else {
    std::vector<std::future<void>> workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.push_back(std::async(std::launch::async, [&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= work.size()) return;
          process_one(i);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }

  std::ofstream out(corpus_file, std::ios::trunc);
  if (!out) {
    throw FormatError("corpus: cannot write " + corpus_file.string());
  }
  for (const CaptionSet& set : results) {
    json j;
    j["id"] = set.stimulus_id;
    j["v_cc"] = set.v_cc;
    for (const auto& [slot, capt] : set.captions) j["v_" + slot] = capt;
    json reports = json::object();
    for (const auto& [slot, rep] : set.reports) {
      reports[slot] = report_to_json(rep);
    }
    j["reports"] = reports;
    j["client"] = set.client_id;
    j["prompt_hash"] = set.prompt_hash;
    if (set.error) {
      j["error"] = *set.error;
      ++stats.n_errors;
    }
    out << j.dump() << "\n";
    ++stats.n_records;
    stats.n_captions += set.captions.size();
  }
  stats.cache_hits = cache_hits.load();
  return stats;
}

CaptionTable CaptionTable::load(const std::filesystem::path& corpus_file) {
  std::ifstream in(corpus_file);
  if (!in) {
    throw MissingInputError("corpus: cannot open " + corpus_file.string());
  }
  CaptionTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("corpus: bad record: ") + e.what());
    }
    CaptionSet set;
    set.stimulus_id = j.at("id").get<std::uint64_t>();
    set.v_cc = j.at("v_cc").get<std::string>();
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key().rfind("v_", 0) == 0 && it.key() != "v_cc") {
        set.captions[it.key().substr(2)] = it.value().get<std::string>();
      }
    }
    if (j.contains("reports")) {
      for (auto it = j["reports"].begin(); it != j["reports"].end(); ++it) {
        set.reports[it.key()] = report_from_json(it.value());
      }
    }
    if (j.contains("error")) set.error = j["error"].get<std::string>();
    table.sets_[set.stimulus_id] = std::move(set);
  }
  return table;
}

const CaptionSet& CaptionTable::at(std::uint64_t stimulus_id) const {
  auto it = sets_.find(stimulus_id);
  if (it == sets_.end()) {
    throw MissingInputError("corpus: no captions for stimulus " +
                            std::to_string(stimulus_id));
  }
  return it->second;
}

bool CaptionTable::contains(std::uint64_t stimulus_id) const {
  return sets_.count(stimulus_id) > 0;
}

const std::string& CaptionTable::caption(std::uint64_t stimulus_id,
                                         const std::string& granularity) const {
  const CaptionSet& set = at(stimulus_id);
  if (granularity == "cc") return set.v_cc;
  auto it = set.captions.find(granularity);
  if (it == set.captions.end()) {
    throw MissingInputError("corpus: stimulus " + std::to_string(stimulus_id) +
                            " has no caption at granularity " + granularity);
  }
  return it->second;
}

}  // namespace synmind::mimevis
