// Error metrics, the Cramer-Rao bound pair, the subspace-projection baseline
// and top-P defect detection scoring.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crpca/numerics.hpp"

namespace crpca {

/// Mean of ||X^_i - X_i||_F / ||X_i||_F. Shared by rmse_l and rmse_s.
double normalized_rmse(std::span<const CMatrix> estimates, std::span<const CMatrix> truths);

inline double rmse_l(std::span<const CMatrix> estimates, std::span<const CMatrix> truths) {
  return normalized_rmse(estimates, truths);
}
inline double rmse_s(std::span<const CMatrix> estimates, std::span<const CMatrix> truths) {
  return normalized_rmse(estimates, truths);
}

/// Mean over samples of the unnormalized l2 distance of the stacked
/// [vec(L); vec(S)] vectors.
double rmse_ls(std::span<const CMatrix> est_L, std::span<const CMatrix> est_S,
               std::span<const CMatrix> true_L, std::span<const CMatrix> true_S);

struct CrbInputs {
  Index M = 0;
  Index N = 0;
  Index K = 0;
  Index sparsity_s = 0;
  Index rank_r = 0;
  double noise_var = 1.0;

  /// (M + N) r - r^2.
  double degrees_of_freedom() const;
  void validate() const;
};

struct CrbBounds {
  double lower = 0.0;
  double upper = 0.0;
};

CrbBounds crb_bounds(const CrbInputs& in);

/// Removes the top clutter_rank singular components of the full M x N data
/// and images the remainder by least squares against the dictionary.
CVector sp_baseline(const CMatrix& Y_full, Index clutter_rank, const CMatrix& dictionary);

/// Same, with a precomputed pseudoinverse of the dictionary.
CVector sp_baseline_with_pinv(const CMatrix& Y_full, Index clutter_rank,
                              const CMatrix& dictionary_pinv);

/// Indices of the `count` largest-magnitude entries, ties to the lower index.
std::vector<Index> top_indices(const CVector& v, Index count);

/// Fraction of true_indices found among the P = |true_indices| largest
/// entries of estimate.
double detection_hit_rate(const CVector& estimate, std::span<const Index> true_indices);

}  // namespace crpca
