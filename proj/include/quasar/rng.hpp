#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace quasar {

// Deterministic helpers on top of mt19937_64. The standard distributions and
// std::shuffle are implementation-defined, so seeded runs would not reproduce
// across toolchains; these do.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Uniform value in [0, bound) via rejection sampling; unbiased.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

inline std::int64_t uniform_range(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) hi = lo;
  return lo + static_cast<std::int64_t>(
                  uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

template <typename T>
void fisher_yates(std::mt19937_64& rng, std::vector<T>& items) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

inline std::vector<size_t> random_permutation(std::mt19937_64& rng, size_t n) {
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  fisher_yates(rng, perm);
  return perm;
}

}  // namespace quasar
