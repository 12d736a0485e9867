#pragma once
// Seed hierarchy. Every random quantity in the library comes from an engine
// seeded by deriveSeed(parent, tag...), so a single master seed reproduces a
// whole experiment and sibling derivation paths never share a stream.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace randef {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used only to turn derivation tags into integers.
constexpr std::uint64_t tagHash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr Seed deriveSeed(Seed parent, std::uint64_t tag) noexcept {
  return mix64(mix64(parent) ^ mix64(tag ^ 0x5851f42d4c957f2dULL));
}

constexpr Seed deriveSeed(Seed parent, std::string_view tag) noexcept {
  return deriveSeed(parent, tagHash(tag));
}

/// deriveSeed applied left to right: deriveSeed(deriveSeed(parent, a), b) ...
constexpr Seed deriveSeed(Seed parent, std::string_view tag,
                          std::initializer_list<std::uint64_t> path) noexcept {
  Seed s = deriveSeed(parent, tag);
  for (std::uint64_t p : path) s = deriveSeed(s, p);
  return s;
}

inline Engine makeEngine(Seed seed) { return Engine(seed); }

}  // namespace randef
