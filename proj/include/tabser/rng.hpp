#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace tabser {

// std::uniform_int_distribution is implementation-defined, so all sampling
// goes through the helpers below to keep outputs identical across platforms.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform draw from [0, n) by rejection sampling.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t span = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % span);
}

template <typename T>
void shuffle_values(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle_values(perm, rng);
  return perm;
}

/// Permutation of [0, n) resampled until it differs from the identity.
/// For n < 2 the identity is the only permutation and is returned as-is.
inline std::vector<std::size_t> random_non_identity_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm = random_permutation(n, rng);
  if (n < 2) return perm;
  auto is_identity = [](const std::vector<std::size_t>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] != i) return false;
    }
    return true;
  };
  while (is_identity(perm)) {
    perm = random_permutation(n, rng);
  }
  return perm;
}

}  // namespace tabser
