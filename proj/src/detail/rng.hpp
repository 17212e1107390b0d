#pragma once

#include <cstdint>
#include <random>

namespace maxent::detail {

/// Independent engine for (seed, stream); streams separate the uses of one
/// user seed (e.g. restarts, repeats) without correlating them.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace maxent::detail
