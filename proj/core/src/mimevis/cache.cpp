#include "synmind/mimevis/cache.hpp"

#include <fstream>

#include "synmind/common/errors.hpp"
#include "synmind/common/hash.hpp"

namespace synmind::mimevis {

CaptionCache::CaptionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CaptionCache::entry_path(const std::string& key) const {
  return dir_ / (hash_hex(key) + ".json");
}

std::optional<std::string> CaptionCache::get(const std::string& key) const {
  std::ifstream in(entry_path(key));
  if (!in) return std::nullopt;
  std::string payload((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (payload.empty()) return std::nullopt;
  return payload;
}

void CaptionCache::put(const std::string& key,
                       const std::string& json_payload) const {
  const auto final_path = entry_path(key);
  const auto tmp_path =
      final_path.string() + ".tmp." + hash_hex(fnv1a64(key) ^ 0x5bd1e995ULL);
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    out << json_payload;
    if (!out) throw FormatError("caption cache: cannot write " + tmp_path);
  }
  std::filesystem::rename(tmp_path, final_path);
}

}  // namespace synmind::mimevis
