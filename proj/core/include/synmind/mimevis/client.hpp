#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace synmind::mimevis {

/// One round of the caption dialogue. The prompt carries the rendered
/// template text; the structured fields let offline clients honor the
/// constraints without parsing prose.
struct ChatRequest {
  int round = 1;
  std::string prompt;
  std::vector<std::string> object_names;
  std::string reference_caption;  // round 2
  std::size_t word_budget = 0;    // round 2
  std::string prior_text;         // round-1 output, round 2 only
  std::string violation;          // appended on re-prompts
  const nn::Tensor<float>* image = nullptr;
};

struct ChatResponse {
  std::string text;
};

/// Chat-style VLM endpoint. The mock is deterministic given
/// (prompt, image, client seed); remote clients promise nothing.
class VlmClient {
 public:
  virtual ~VlmClient() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
  std::size_t call_count() const { return calls_.load(); }

 protected:
  void record_call() { calls_.fetch_add(1); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Deterministic offline stand-in. Round one enumerates the stimulus's
/// object names plus fixed attribute phrases; round two emits a caption that
/// contains the reference caption verbatim and fills to the word budget.
class MockVlmClient : public VlmClient {
 public:
  explicit MockVlmClient(std::uint64_t seed = 0) : seed_(seed) {}
  ChatResponse chat(const ChatRequest& request) override;
  std::string id() const override;

 private:
  std::uint64_t seed_ = 0;
};

/// Minimal JSON chat protocol over HTTP POST: {"messages": [{"role": "user",
/// "content": [{"type": "text", ...}, {"type": "image", "data": base64}]}]},
/// response {"text": ...}. Credentials come from an environment variable
/// (Authorization: Bearer). The transport is injectable for tests.
class HttpVlmClient : public VlmClient {
 public:
  struct Options {
    std::string endpoint;  // http://host:port/path
    int timeout_seconds = 30;
    int max_retries = 2;
    std::string api_key_env = "SYNMIND_VLM_API_KEY";
  };

  /// Returns the response body, or nullopt on transport failure.
  using PostFn = std::function<std::optional<std::string>(const std::string& body)>;

  explicit HttpVlmClient(Options options, PostFn transport = nullptr);
  ChatResponse chat(const ChatRequest& request) override;
  std::string id() const override;

 private:
  Options options_;
  PostFn transport_;
};

}  // namespace synmind::mimevis
