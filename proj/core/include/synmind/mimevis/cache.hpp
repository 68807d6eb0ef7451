#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace synmind::mimevis {

/// Directory of JSON files named by key hash. Writes go through a temp file
/// and an atomic rename, so concurrent writers on distinct keys are safe and
/// a crash never leaves a torn entry.
class CaptionCache {
 public:
  explicit CaptionCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& json_payload) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const;
  std::filesystem::path dir_;
};

}  // namespace synmind::mimevis
