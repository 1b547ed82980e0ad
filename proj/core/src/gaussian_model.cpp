#include "crpca/gaussian_model.hpp"

#include <cmath>
#include <numeric>

namespace crpca {

MeasurementOperators sample_gaussian_operator(Index K, Index M, Index N, std::uint64_t seed,
                                              AdjointMode mode) {
  if (M < 1 || N < 1) {
    throw std::invalid_argument("operator: M and N must be positive");
  }
  if (K < 1 || K > M * N) {
    throw std::invalid_argument("operator: need 1 <= K <= M*N, got K=" + std::to_string(K));
  }
  Rng rng(seed);
  CMatrix a = draw_normal_matrix(K, M * N, rng, Field::real);
  CMatrix copy = a;
  return MeasurementOperators::create(std::move(a), std::move(copy), {M, N}, {M, N}, mode);
}

std::vector<Index> support_of(const CMatrix& m) {
  std::vector<Index> idx;
  for (Index i = 0; i < m.size(); ++i) {
    if (m.data()[i] != Complex(0.0, 0.0)) {
      idx.push_back(i);
    }
  }
  return idx;
}

Scene sample_scene(Index M, Index N, Index rank_r, Index sparsity_s, std::uint64_t seed,
                   Field field) {
  if (M < 1 || N < 1) {
    throw std::invalid_argument("scene: M and N must be positive");
  }
  if (rank_r < 1 || rank_r > std::min(M, N)) {
    throw std::invalid_argument("scene: rank must lie in [1, min(M,N)]");
  }
  if (sparsity_s < 1 || sparsity_s > M * N) {
    throw std::invalid_argument("scene: sparsity must lie in [1, M*N]");
  }
  Rng rng(seed);
  Scene scene;
  const CMatrix g1 = draw_normal_matrix(M, rank_r, rng, field);
  const CMatrix g2 = draw_normal_matrix(rank_r, N, rng, field);
  scene.L = g1 * g2;
  scene.L /= scene.L.norm();

  scene.support_indices = sample_without_replacement(M * N, sparsity_s, rng);
  scene.S = CMatrix::Zero(M, N);
  for (Index idx : scene.support_indices) {
    Complex v = draw_normal(rng, field);
    // A zero draw would silently shrink the support.
    while (v == Complex(0.0, 0.0)) {
      v = draw_normal(rng, field);
    }
    scene.S.data()[idx] = v;
  }
  scene.S /= scene.S.norm();
  scene.rank_r = rank_r;
  scene.support_size_s = sparsity_s;
  return scene;
}

CVector add_noise_exact_snr(const CVector& clean, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db)) {
    throw std::invalid_argument("SNR must not be NaN");
  }
  const double signal = clean.norm();
  if (std::isinf(snr_db) && snr_db > 0) {
    return clean;
  }
  if (signal == 0.0) {
    return CVector::Zero(clean.size());
  }
  const Field field = is_real_valued(clean) ? Field::real : Field::complex;
  Rng rng(seed);
  CVector noise(clean.size());
  for (Index i = 0; i < noise.size(); ++i) {
    noise(i) = draw_normal(rng, field);
  }
  const double target = signal / std::pow(10.0, snr_db / 20.0);
  noise *= target / noise.norm();
  return clean + noise;
}

Observation observe(const MeasurementOperators& ops, const Scene& scene, double snr_db,
                    std::uint64_t seed) {
  Observation obs;
  obs.y = add_noise_exact_snr(ops.forward(scene.L, scene.S), snr_db, seed);
  obs.snr_db = snr_db;
  obs.noise_seed = seed;
  return obs;
}

}  // namespace crpca
