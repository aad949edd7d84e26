#pragma once

#include <cstdint>
#include <random>

namespace pdmpc {

/// The one random source used across the engine. Every run owns a single
/// instance seeded from the run configuration, so reruns with the same
/// seed are bit-identical.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace pdmpc
