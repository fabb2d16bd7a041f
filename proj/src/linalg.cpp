#include "initcap/linalg.hpp"

namespace initcap::detail {

std::uint64_t hash_bytes(const void* data, std::size_t bytes) noexcept {
  // FNV-1a, folded through mix64 for better low-bit diffusion.
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace initcap::detail
