#pragma once

#include <cstdint>

namespace gridshs {

/// Stream tags for child-seed derivation. Adding a tag never shifts others.
enum class SeedStream : std::uint64_t {
  enumeration = 1,
  gain_design = 2,
  dataset_row = 3,
  dataset_noise = 4,
  schedule_draw = 5,
  schedule_kick = 6,
  schedule_noise = 7,
  folds = 8,
  split = 9,
  calibration = 10,
  desk_grid = 11,
  equivalence = 12,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based split: child = mix(mix(master ^ stream) + index). Depends
/// only on (master, stream, index), never on evaluation order.
constexpr std::uint64_t child_seed(std::uint64_t master, SeedStream stream,
                                   std::uint64_t index = 0) {
  const std::uint64_t s = splitmix64(master ^ (static_cast<std::uint64_t>(stream) << 56));
  return splitmix64(s + splitmix64(index));
}

}  // namespace gridshs
