// Seeded random draws shared by the synthetic data generators.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "crpca/numerics.hpp"

namespace crpca {

using Rng = std::mt19937_64;

enum class Field { real, complex };

/// Standard normal draw; complex draws are circular with unit total variance.
Complex draw_normal(Rng& rng, Field field);
CMatrix draw_normal_matrix(Index rows, Index cols, Rng& rng, Field field);

/// Independent child seed for (stream, index) of a master seed (splitmix64
/// finalizer over the combined words).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

/// `count` distinct indices from [0, n), uniformly, returned ascending.
std::vector<Index> sample_without_replacement(Index n, Index count, Rng& rng);

}  // namespace crpca
