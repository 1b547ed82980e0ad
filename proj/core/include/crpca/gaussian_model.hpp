// Synthetic data for the generic Gaussian experiment: i.i.d. Gaussian
// operators, random low-rank + sparse scenes and noisy compressed
// observations with an exactly realized SNR.

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "crpca/operators.hpp"
#include "crpca/random.hpp"

namespace crpca {

/// Ground truth for one sample.
struct Scene {
  CMatrix L;
  CMatrix S;
  Index rank_r = 0;
  Index support_size_s = 0;
  /// Column-major linear indices of the nonzeros of S, ascending.
  std::vector<Index> support_indices;
};

struct Observation {
  CVector y;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t noise_seed = 0;
};

/// K x (M*N) operator with i.i.d. N(0,1) real entries, used for both A_l and
/// A_s.
MeasurementOperators sample_gaussian_operator(Index K, Index M, Index N, std::uint64_t seed,
                                              AdjointMode mode = AdjointMode::pseudoinverse);

/// L = G1 * G2 (M x r times r x N), S with exactly sparsity_s nonzeros on a
/// uniformly random support; both normalized to unit Frobenius norm.
Scene sample_scene(Index M, Index N, Index rank_r, Index sparsity_s, std::uint64_t seed,
                   Field field = Field::real);

/// Noise scaled so that ||A_l vec(L) + A_s vec(S)||^2 / ||n||^2 equals the
/// requested SNR exactly. An infinite SNR, or a zero signal, gives n = 0.
Observation observe(const MeasurementOperators& ops, const Scene& scene, double snr_db,
                    std::uint64_t seed);

/// Adds noise to a clean measurement vector under the exact-SNR convention.
/// Real noise is drawn when the clean vector is real.
CVector add_noise_exact_snr(const CVector& clean, double snr_db, std::uint64_t seed);

/// Column-major indices of the nonzero entries.
std::vector<Index> support_of(const CMatrix& m);

}  // namespace crpca
