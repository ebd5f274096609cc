#pragma once

#include <cstdint>
#include <random>

namespace revphase {

/// Engine used for every stochastic draw in the library.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`. Depends only on the pair, so
/// ensemble member j draws the same numbers whatever order (or thread) it
/// is evaluated in.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

}  // namespace revphase
