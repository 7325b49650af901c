#pragma once

#include <cstdint>
#include <random>

namespace bentrank {

using Rng = std::mt19937_64;

// Stream tags keep the generators of unrelated consumers disjoint.
inline constexpr std::uint64_t kStreamData = 1;
inline constexpr std::uint64_t kStreamBootstrap = 2;
inline constexpr std::uint64_t kStreamFolds = 3;

/// Generator for (seed, stream, index); the state depends only on these
/// three values, so replicates can run in any order or thread.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace bentrank
