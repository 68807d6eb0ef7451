#include "synmind/common/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace synmind::text {

namespace {

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kStopwords = {
      "a",    "an",   "and",  "are",  "as",    "at",   "be",   "by",
      "for",  "from", "has",  "have", "in",    "is",   "it",   "its",
      "of",   "on",   "or",   "that", "the",   "their", "there", "this",
      "to",   "was",  "were", "with", "while", "over", "under", "near",
      "into", "onto", "up",   "down",
  };
  return kStopwords;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char raw : s) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || raw == '\'' || raw == '-') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c) || std::ispunct(c)) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t word_count(std::string_view s) { return tokenize(s).size(); }

bool is_stopword(const std::string& token) { return stopwords().count(token) > 0; }

std::string stem(const std::string& token) {
  std::string t = token;
  auto ends_with = [&](std::string_view suf) {
    return t.size() > suf.size() &&
           t.compare(t.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with("ing") && t.size() > 5) {
    t.erase(t.size() - 3);
  } else if (ends_with("ed") && t.size() > 4) {
    t.erase(t.size() - 2);
  } else if (ends_with("es") && t.size() > 4) {
    t.erase(t.size() - 2);
  } else if (ends_with("s") && !ends_with("ss")) {
    t.erase(t.size() - 1);
  }
  return t;
}

std::vector<std::string> content_stems(std::string_view s) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& tok : tokenize(s)) {
    if (is_stopword(tok)) continue;
    std::string st = stem(tok);
    if (seen.insert(st).second) out.push_back(st);
  }
  return out;
}

double content_overlap(std::string_view candidate, std::string_view reference) {
  const auto ref = content_stems(reference);
  if (ref.empty()) return 1.0;
  std::unordered_set<std::string> cand;
  for (const auto& tok : tokenize(candidate)) cand.insert(stem(tok));
  std::size_t hit = 0;
  for (const auto& r : ref) {
    if (cand.count(r)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(ref.size());
}

std::string truncate_words(std::string_view s, std::size_t n) {
  const auto words = tokenize(s);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < n; ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace synmind::text
