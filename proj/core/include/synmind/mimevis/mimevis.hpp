#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synmind/mimevis/cache.hpp"
#include "synmind/mimevis/client.hpp"
#include "synmind/synthdata/dataset.hpp"

namespace synmind::mimevis {

/// Editable prompt wording for both dialogue rounds. Placeholders:
/// round two understands {round1}, {reference}, {budget}, {violation}.
struct PromptTemplates {
  std::string round_one;
  std::string round_two;

  static PromptTemplates defaults();
  static PromptTemplates from_directory(const std::filesystem::path& dir);
  std::string hash() const;
};

struct ValidationReport {
  std::size_t word_count = 0;
  std::size_t budget = 0;
  double grounding_overlap = 0.0;
  bool passed = false;
};

/// passed iff word_count <= budget and grounding_overlap >= tau_ground.
ValidationReport validate_caption(const std::string& caption,
                                  const std::string& reference_caption,
                                  std::size_t budget,
                                  double tau_ground = 0.6);

struct CaptionSet {
  std::uint64_t stimulus_id = 0;
  std::string v_cc;
  std::map<std::string, std::string> captions;          // "30" -> text
  std::map<std::string, ValidationReport> reports;      // keyed like captions
  std::string client_id;
  std::string prompt_hash;
  std::optional<std::string> error;
};

struct MimevisOptions {
  std::vector<std::size_t> budgets = {30, 45, 60, 75};
  double tau_ground = 0.6;
  int reprompt_attempts = 2;  // before the truncation fallback
  std::size_t max_inflight = 4;
  std::uint64_t seed = 0;
  PromptTemplates templates = PromptTemplates::defaults();
};

/// Deterministic reference caption built from the stimulus's object names;
/// stands in for a curated ground-truth description.
std::string reference_caption(const std::vector<std::string>& object_names);

/// Round one: free-form description of the stimulus.
std::string round_one_describe(VlmClient& client,
                               const nn::Tensor<float>& stimulus_image,
                               const std::vector<std::string>& object_names,
                               const PromptTemplates& templates);

struct CondenseResult {
  std::string caption;
  ValidationReport report;
  bool used_fallback = false;
};

/// Round two: condenses the round-one text to at most `budget` words while
/// staying grounded in the reference caption. Re-prompts with the violation
/// appended, then falls back to deterministic truncation of the round-one
/// text. Throws CaptionError when the reference caption is empty.
CondenseResult round_two_condense(VlmClient& client,
                                  const std::string& raw_description,
                                  const std::string& reference,
                                  std::size_t budget,
                                  const MimevisOptions& options = {});

struct CorpusStats {
  std::size_t n_records = 0;
  std::size_t n_captions = 0;
  std::size_t n_errors = 0;
  std::size_t cache_hits = 0;
};

/// Captions every stimulus (train and test) into a JSON-lines corpus, one
/// record per stimulus, using the cache keyed by
/// (stimulus id, budget, prompt-template hash, client id).
CorpusStats synthesize_corpus(VlmClient& client, const data::Dataset& dataset,
                              const std::filesystem::path& corpus_file,
                              const std::filesystem::path& cache_dir,
                              const MimevisOptions& options = {});

/// Corpus lookup table keyed by stimulus id.
class CaptionTable {
 public:
  static CaptionTable load(const std::filesystem::path& corpus_file);
  const CaptionSet& at(std::uint64_t stimulus_id) const;
  bool contains(std::uint64_t stimulus_id) const;
  std::size_t size() const { return sets_.size(); }

  /// Caption text for a granularity tag in {cc, 30, 45, 60, 75}.
  const std::string& caption(std::uint64_t stimulus_id,
                             const std::string& granularity) const;

 private:
  std::map<std::uint64_t, CaptionSet> sets_;
};

}  // namespace synmind::mimevis
