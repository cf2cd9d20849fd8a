#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace msa {

/// FNV-1a 64-bit content digest, rendered as "fnv1a64:<16 hex digits>".
/// An identifier for change detection, not a cryptographic hash.
inline std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

} // namespace msa
