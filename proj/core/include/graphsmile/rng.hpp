#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace graphsmile {

/// Independent generator for a tuple of integers, e.g. (seed, epoch, step).
inline std::mt19937_64 seeded_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace graphsmile
