#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace njode {

// FNV-1a, 64-bit. Used for parameter fingerprints and content-addressed
// dataset directories; not cryptographic.
inline std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s) { return fnv1a(s.data(), s.size()); }

}  // namespace njode
