#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace synmind {

/// FNV-1a over bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16-hex-digit rendering of a 64-bit hash, used for config hashes and
/// cache keys.
std::string hash_hex(std::uint64_t h);

std::string hash_hex(std::string_view bytes);

}  // namespace synmind
