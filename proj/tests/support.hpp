// Shared helpers for the property tests.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>

namespace hyperclock::testing {

inline std::uint64_t baseSeed() {
  if (const char* s = std::getenv("HYPERCLOCK_SEED")) return std::strtoull(s, nullptr, 10);
  return 20240521;
}

inline std::mt19937_64 rng(std::uint64_t salt) { return std::mt19937_64(baseSeed() * 1000003 + salt); }

inline int uniform(std::mt19937_64& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline bool coin(std::mt19937_64& g, double p = 0.5) { return std::bernoulli_distribution(p)(g); }

}  // namespace hyperclock::testing
