#include "synmind/mimevis/client.hpp"

#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "synmind/common/errors.hpp"
#include "synmind/common/hash.hpp"
#include "synmind/common/rng.hpp"
#include "synmind/common/text.hpp"

namespace synmind::mimevis {

namespace {

const char* kAttributePhrases[] = {
    "the scene is softly lit with even brightness",
    "colors stay in muted gray tones",
    "surfaces show a smooth fine texture",
    "the arrangement feels calm and balanced",
    "edges are crisp against a plain backdrop",
    "the framing keeps every object fully visible",
};
constexpr std::size_t kAttributeCount =
    sizeof(kAttributePhrases) / sizeof(char*);

const char* kFillerWords[] = {
    "soft",   "gray",     "calm",    "still",   "smooth",  "muted",
    "plain",  "gentle",   "quiet",   "even",    "simple",  "clear",
    "steady", "light",    "pale",    "subtle",  "tidy",    "neat",
    "mild",   "faint",    "level",   "clean",   "open",    "flat",
    "broad",  "close",    "distant", "central", "fine",    "crisp",
    "dim",    "bright",   "cool",    "warm",    "sparse",  "dense",
    "low",    "high",     "small",   "large",   "round",   "angular",
};
constexpr std::size_t kFillerCount = sizeof(kFillerWords) / sizeof(char*);

std::string join_names(const std::vector<std::string>& names) {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) os << (i + 1 == names.size() ? " and " : ", ");
    const std::string& n = names[i];
    const bool vowel = !n.empty() && std::string("aeiou").find(n[0]) !=
                                         std::string::npos;
    os << (vowel ? "an " : "a ") << n;
  }
  return os.str();
}

std::uint64_t request_key(std::uint64_t seed, const ChatRequest& r) {
  std::uint64_t h = mix_u64(seed, fnv1a64(r.prompt));
  for (const auto& n : r.object_names) h = mix_u64(h, fnv1a64(n));
  if (r.image != nullptr && r.image->size() > 0) {
    h = mix_u64(h, fnv1a64(std::string_view(
                       reinterpret_cast<const char*>(r.image->data()),
                       r.image->size() * sizeof(float))));
  }
  return h;
}

}  // namespace

ChatResponse MockVlmClient::chat(const ChatRequest& request) {
  record_call();
  CounterRng rng(request_key(seed_, request));
  if (request.round == 1) {
    std::ostringstream os;
    if (request.object_names.empty()) {
      os << "The image shows an abstract pattern.";
    } else {
      os << "The image shows " << join_names(request.object_names) << ".";
    }
    // Two attribute sentences, picked deterministically per stimulus.
    const std::size_t first = rng.next_below(kAttributeCount);
    const std::size_t second = (first + 1 + rng.next_below(kAttributeCount - 1)) %
                               kAttributeCount;
    os << " " << kAttributePhrases[first] << ". " << kAttributePhrases[second]
       << ".";
    if (!request.object_names.empty()) {
      os << " The " << request.object_names.front()
         << " sits near the center of the frame.";
    }
    return {os.str()};
  }

  // Round two: reference caption verbatim, then deterministic filler words
  // until the budget is met exactly.
  std::vector<std::string> words = text::tokenize(request.reference_caption);
  for (const auto& name : request.object_names) {
    for (const auto& tok : text::tokenize(name)) {
      if (words.size() < request.word_budget) words.push_back(tok);
    }
  }
  std::size_t cursor = rng.next_below(kFillerCount);
  while (words.size() < request.word_budget) {
    words.push_back(kFillerWords[cursor % kFillerCount]);
    ++cursor;
  }
  if (words.size() > request.word_budget) words.resize(request.word_budget);
  std::ostringstream os;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) os << ' ';
    os << words[i];
  }
  return {os.str()};
}

std::string MockVlmClient::id() const {
  return "mock-" + hash_hex(seed_);
}

HttpVlmClient::HttpVlmClient(Options options, PostFn transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  if (!transport_) {
    transport_ = [this](const std::string& body) -> std::optional<std::string> {
      // Split endpoint into host part and path.
      std::string url = options_.endpoint;
      std::string path = "/";
      auto scheme_end = url.find("://");
      auto path_start =
          url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
      if (path_start != std::string::npos) {
        path = url.substr(path_start);
        url = url.substr(0, path_start);
      }
      httplib::Client cli(url);
      cli.set_connection_timeout(options_.timeout_seconds);
      cli.set_read_timeout(options_.timeout_seconds);
      httplib::Headers headers;
      if (const char* key = std::getenv(options_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
      auto res = cli.Post(path, headers, body, "application/json");
      if (!res || res->status < 200 || res->status >= 300) return std::nullopt;
      return res->body;
    };
  }
}

ChatResponse HttpVlmClient::chat(const ChatRequest& request) {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  if (request.image != nullptr) {
    // Raw float grid as base64 is enough for the minimal protocol; hosted
    // adapters convert to their native image encoding.
    const auto* bytes = reinterpret_cast<const unsigned char*>(request.image->data());
    const std::size_t len = request.image->size() * sizeof(float);
    static const char tbl[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string b64;
    b64.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
      std::uint32_t v = bytes[i] << 16;
      if (i + 1 < len) v |= bytes[i + 1] << 8;
      if (i + 2 < len) v |= bytes[i + 2];
      b64.push_back(tbl[(v >> 18) & 63]);
      b64.push_back(tbl[(v >> 12) & 63]);
      b64.push_back(i + 1 < len ? tbl[(v >> 6) & 63] : '=');
      b64.push_back(i + 2 < len ? tbl[v & 63] : '=');
    }
    content.push_back({{"type", "image"}, {"data", b64}});
  }
  nlohmann::json body = {
      {"messages",
       nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};

  const int attempts_allowed = options_.max_retries + 1;
  for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
    record_call();
    auto response = transport_(body.dump());
    if (!response) continue;
    try {
      auto j = nlohmann::json::parse(*response);
      std::string result_text = j.at("text").get<std::string>();
      if (result_text.empty()) {
        throw CaptionError("vlm client: empty response text");
      }
      return {result_text};
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("vlm client: malformed response: ") +
                        e.what());
    }
  }
  throw ClientError("vlm client: transport failed after " +
                        std::to_string(attempts_allowed) + " attempts",
                    attempts_allowed);
}

std::string HttpVlmClient::id() const { return "http-" + hash_hex(options_.endpoint); }

}  // namespace synmind::mimevis
