#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace se3nav {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent generator for a named purpose and agent, derived from the
/// root seed only, so draws never depend on execution order.
inline std::mt19937_64 substream(std::uint64_t root, std::string_view purpose,
                                 std::uint64_t agent) {
  const std::uint64_t s =
      splitmix64(splitmix64(root ^ fnv1a(purpose)) + splitmix64(agent + 1));
  return std::mt19937_64(s);
}

}  // namespace se3nav
