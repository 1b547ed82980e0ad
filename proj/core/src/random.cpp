#include "crpca/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crpca {

Complex draw_normal(Rng& rng, Field field) {
  std::normal_distribution<double> normal(0.0, 1.0);
  if (field == Field::real) {
    return {normal(rng), 0.0};
  }
  const double re = normal(rng);
  const double im = normal(rng);
  return Complex(re, im) * M_SQRT1_2;
}

CMatrix draw_normal_matrix(Index rows, Index cols, Rng& rng, Field field) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = draw_normal(rng, field);
    }
  }
  return m;
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(master) ^ stream) ^ index);
}

std::vector<Index> sample_without_replacement(Index n, Index count, Rng& rng) {
  if (count < 0 || count > n) {
    throw std::invalid_argument("cannot draw " + std::to_string(count) + " distinct indices from " +
                                std::to_string(n));
  }
  // Partial Fisher-Yates.
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace crpca
