#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crembo {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag path, so
/// every consumer (embedding k, fit at step n, ...) has its own stream
/// without sharing generator state.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
  return h;
}

// Stream tags.
enum SeedTag : std::uint64_t {
  kTagEmbedding = 1,
  kTagInitDesign = 2,
  kTagFit = 3,
  kTagAcquisition = 4,
  kTagObjective = 5,
  kTagTrial = 6,
};

}  // namespace crembo
