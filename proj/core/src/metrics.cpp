#include "crpca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "crpca/operators.hpp"

namespace crpca {

double normalized_rmse(std::span<const CMatrix> estimates, std::span<const CMatrix> truths) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("rmse: estimate and truth lists differ in length");
  }
  if (truths.empty()) {
    throw std::invalid_argument("rmse: empty sample list");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (estimates[i].rows() != truths[i].rows() || estimates[i].cols() != truths[i].cols()) {
      throw std::invalid_argument("rmse: shape mismatch at sample " + std::to_string(i));
    }
    const double n = truths[i].norm();
    if (n == 0.0) {
      throw std::invalid_argument("rmse: zero-norm truth at sample " + std::to_string(i));
    }
    total += (estimates[i] - truths[i]).norm() / n;
  }
  return total / static_cast<double>(truths.size());
}

double rmse_ls(std::span<const CMatrix> est_L, std::span<const CMatrix> est_S,
               std::span<const CMatrix> true_L, std::span<const CMatrix> true_S) {
  const std::size_t n = true_L.size();
  if (est_L.size() != n || est_S.size() != n || true_S.size() != n) {
    throw std::invalid_argument("rmse_ls: list lengths differ");
  }
  if (n == 0) {
    throw std::invalid_argument("rmse_ls: empty sample list");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dl = (est_L[i] - true_L[i]).squaredNorm();
    const double ds = (est_S[i] - true_S[i]).squaredNorm();
    total += std::sqrt(dl + ds);
  }
  return total / static_cast<double>(n);
}

double CrbInputs::degrees_of_freedom() const {
  return static_cast<double>((M + N) * rank_r - rank_r * rank_r);
}

void CrbInputs::validate() const {
  if (M < 1 || N < 1) throw std::invalid_argument("crb: M and N must be positive");
  if (rank_r < 1 || rank_r > std::min(M, N)) throw std::invalid_argument("crb: need 1 <= r <= min(M,N)");
  if (sparsity_s < 0) throw std::invalid_argument("crb: negative sparsity");
  if (K <= sparsity_s) throw std::invalid_argument("crb: need K > s");
  if (!(noise_var >= 0.0)) throw std::invalid_argument("crb: noise variance must be nonnegative");
}

CrbBounds crb_bounds(const CrbInputs& in) {
  in.validate();
  const double n0 = in.degrees_of_freedom();
  const double s = static_cast<double>(in.sparsity_s);
  const double gap = static_cast<double>(in.K - in.sparsity_s);
  const double k_term = static_cast<double>(in.K) * n0 / gap;
  const double mn_term = static_cast<double>(in.M * in.N) * n0 / gap;
  return {(s - n0 + k_term / 3.0 + 2.0 * mn_term / 3.0) * in.noise_var,
          (s - n0 + 3.0 * k_term + 2.0 * mn_term) * in.noise_var};
}

CVector sp_baseline_with_pinv(const CMatrix& Y_full, Index clutter_rank,
                              const CMatrix& dictionary_pinv) {
  const Index k = std::min(Y_full.rows(), Y_full.cols());
  if (clutter_rank < 0 || clutter_rank >= k) {
    throw std::invalid_argument("sp_baseline: clutter rank must lie in [0, min(M,N))");
  }
  if (dictionary_pinv.cols() != Y_full.size()) {
    throw std::invalid_argument("sp_baseline: dictionary does not match the data size");
  }
  CMatrix cleaned = Y_full;
  if (clutter_rank > 0) {
    const SvdResult f = thin_svd(Y_full);
    const auto u = f.left_vectors.leftCols(clutter_rank);
    const auto v = f.right_vectors.leftCols(clutter_rank);
    cleaned -= u * f.singular_values.head(clutter_rank).cast<Complex>().asDiagonal() * v.adjoint();
  }
  return dictionary_pinv * vec(cleaned);
}

CVector sp_baseline(const CMatrix& Y_full, Index clutter_rank, const CMatrix& dictionary) {
  return sp_baseline_with_pinv(Y_full, clutter_rank, pseudoinverse(dictionary));
}

std::vector<Index> top_indices(const CVector& v, Index count) {
  count = std::clamp<Index>(count, 0, v.size());
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + count, order.end(), [&](Index a, Index b) {
    const double ma = std::abs(v(a));
    const double mb = std::abs(v(b));
    return ma != mb ? ma > mb : a < b;
  });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

double detection_hit_rate(const CVector& estimate, std::span<const Index> true_indices) {
  if (true_indices.empty()) {
    throw std::invalid_argument("detection_hit_rate: need at least one true index");
  }
  const auto top = top_indices(estimate, static_cast<Index>(true_indices.size()));
  Index hits = 0;
  for (Index t : true_indices) {
    if (std::find(top.begin(), top.end(), t) != top.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(true_indices.size());
}

}  // namespace crpca
