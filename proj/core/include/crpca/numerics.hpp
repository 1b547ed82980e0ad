// Dense complex linear-algebra kernel: vectorization, proximal operators,
// SVD with a fixed phase convention, and the reweighting decay functions.
//
// All matrices are column-major (Eigen default), which is also the order used
// by vec()/unvec(): vec stacks the columns of a matrix.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace crpca {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when a numerical kernel cannot produce a trustworthy result
/// (non-finite input, LAPACK non-convergence, NaN during iteration).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix shape in (rows, cols).
struct Shape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Index rows, Index cols);
inline CMatrix unvec(const CVector& v, Shape shape) {
  return unvec(v, shape.rows, shape.cols);
}

bool all_finite(const CMatrix& m);
bool is_real_valued(const CMatrix& m);

/// Complex soft-thresholding: exp(j*arg(x)) * max(|x| - lambda, 0).
/// Returns exactly zero when |x| <= lambda.
Complex soft_threshold(Complex x, double lambda);

/// Entrywise soft_threshold with a per-entry threshold matrix.
CMatrix soft_threshold_map(const CMatrix& m, const RMatrix& thresholds);

/// Full SVD m = U * diag(sigma) * V^H with U (M x M), V (N x N) and sigma of
/// length min(M, N) in descending order.
///
/// Phase convention: the first entry of each left singular vector whose
/// magnitude exceeds 1e-12 is made real and nonnegative; the removed phase is
/// pushed into the matching right singular vector so the product is unchanged.
/// Repeated calls on the same input are bit-identical.
struct SvdResult {
  CMatrix left_vectors;
  RVector singular_values;
  CMatrix right_vectors;
};

SvdResult svd(const CMatrix& m);

/// Thin variant: U is M x k, V is N x k with k = min(M, N). Same conventions.
SvdResult thin_svd(const CMatrix& m);

/// Singular value soft-thresholding U * diag(ST(sigma_i, t_i)) * V^H where
/// thresholds[i] pairs with the i-th largest singular value.
CMatrix svt(const CMatrix& m, const RVector& thresholds);

/// svt() that also reports the shrunk singular values of the result, sorted
/// in descending order.
struct SvtResult {
  CMatrix matrix;
  RVector singular_values;
};
SvtResult svt_with_spectrum(const CMatrix& m, const RVector& thresholds);

/// Numerical rank: count of singular values above tol * sigma_max (or above
/// tol in absolute terms when relative is false).
Index numerical_rank(const CMatrix& m, double tol, bool relative = true);

enum class DecayKind { constant, log_det, exponential };

std::string_view to_string(DecayKind kind);
/// Accepts "constant", "log_det"/"log", "exponential"/"exp".
DecayKind parse_decay_kind(std::string_view text);

/// Reweighting decay function g(x).
///   constant    : 1
///   log_det     : 1 / (x + gamma)
///   exponential : exp(-x / gamma) / gamma
struct DecaySpec {
  DecayKind kind = DecayKind::constant;
  double gamma = 1.0;
};

double decay(const DecaySpec& spec, double x);

}  // namespace crpca
