#include "crpca/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace crpca {

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols) {
    throw std::invalid_argument("unvec: vector of length " + std::to_string(v.size()) +
                                " cannot be reshaped to " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

bool all_finite(const CMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

bool is_real_valued(const CMatrix& m) {
  return (m.imag().array() == 0.0).all();
}

Complex soft_threshold(Complex x, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("soft_threshold: negative threshold");
  }
  const double mag = std::abs(x);
  if (mag <= lambda) {
    return {0.0, 0.0};
  }
  // Scaling both parts by one real factor keeps the phase exactly.
  return x * ((mag - lambda) / mag);
}

CMatrix soft_threshold_map(const CMatrix& m, const RMatrix& thresholds) {
  if (m.rows() != thresholds.rows() || m.cols() != thresholds.cols()) {
    throw std::invalid_argument("soft_threshold_map: threshold shape mismatch");
  }
  CMatrix out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      out(i, j) = soft_threshold(m(i, j), thresholds(i, j));
    }
  }
  return out;
}

namespace {

enum class SvdJob { full, thin };

void check_lapack(lapack_int info, const char* routine) {
  if (info < 0) {
    throw std::logic_error(std::string(routine) + ": invalid argument " + std::to_string(-info));
  }
  if (info > 0) {
    throw NumericalError(std::string(routine) + ": SVD did not converge");
  }
}

SvdResult real_svd(const RMatrix& input, SvdJob job) {
  const lapack_int m = static_cast<lapack_int>(input.rows());
  const lapack_int n = static_cast<lapack_int>(input.cols());
  const lapack_int k = std::min(m, n);
  const lapack_int ucols = job == SvdJob::full ? m : k;
  const lapack_int vtrows = job == SvdJob::full ? n : k;

  RMatrix a = input;
  RVector s(k);
  RMatrix u(m, ucols);
  RMatrix vt(vtrows, n);
  const char jobz = job == SvdJob::full ? 'A' : 'S';
  check_lapack(LAPACKE_dgesdd(LAPACK_COL_MAJOR, jobz, m, n, a.data(), m, s.data(), u.data(), m,
                              vt.data(), vtrows),
               "dgesdd");
  return {u.cast<Complex>(), s, vt.transpose().cast<Complex>()};
}

SvdResult complex_svd(const CMatrix& input, SvdJob job) {
  const lapack_int m = static_cast<lapack_int>(input.rows());
  const lapack_int n = static_cast<lapack_int>(input.cols());
  const lapack_int k = std::min(m, n);
  const lapack_int ucols = job == SvdJob::full ? m : k;
  const lapack_int vtrows = job == SvdJob::full ? n : k;

  CMatrix a = input;
  RVector s(k);
  CMatrix u(m, ucols);
  CMatrix vt(vtrows, n);
  const char jobz = job == SvdJob::full ? 'A' : 'S';
  check_lapack(LAPACKE_zgesdd(LAPACK_COL_MAJOR, jobz, m, n, a.data(), m, s.data(), u.data(), m,
                              vt.data(), vtrows),
               "zgesdd");
  return {std::move(u), std::move(s), vt.adjoint()};
}

void fix_phases(SvdResult& r) {
  const Index k = r.singular_values.size();
  for (Index i = 0; i < r.left_vectors.cols(); ++i) {
    auto col = r.left_vectors.col(i);
    for (Index row = 0; row < col.size(); ++row) {
      const double mag = std::abs(col(row));
      if (mag > 1e-12) {
        const Complex unit_conj = std::conj(col(row)) / mag;
        col *= unit_conj;
        col(row) = Complex(mag, 0.0);
        if (i < k) {
          r.right_vectors.col(i) *= unit_conj;
        }
        break;
      }
    }
  }
}

SvdResult run_svd(const CMatrix& m, SvdJob job) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw std::invalid_argument("svd: empty matrix");
  }
  if (!all_finite(m)) {
    throw NumericalError("svd: matrix has non-finite entries");
  }
  SvdResult r = is_real_valued(m) ? real_svd(m.real(), job) : complex_svd(m, job);
  fix_phases(r);
  return r;
}

}  // namespace

SvdResult svd(const CMatrix& m) { return run_svd(m, SvdJob::full); }

SvdResult thin_svd(const CMatrix& m) { return run_svd(m, SvdJob::thin); }

SvtResult svt_with_spectrum(const CMatrix& m, const RVector& thresholds) {
  const Index k = std::min(m.rows(), m.cols());
  if (thresholds.size() != k) {
    throw std::invalid_argument("svt: expected " + std::to_string(k) + " thresholds, got " +
                                std::to_string(thresholds.size()));
  }
  if ((thresholds.array() < 0.0).any() || !thresholds.allFinite()) {
    throw std::invalid_argument("svt: thresholds must be finite and nonnegative");
  }
  const SvdResult d = thin_svd(m);
  RVector shrunk(k);
  for (Index i = 0; i < k; ++i) {
    shrunk(i) = std::max(d.singular_values(i) - thresholds(i), 0.0);
  }
  SvtResult out{CMatrix::Zero(m.rows(), m.cols()), RVector()};
  for (Index i = 0; i < k; ++i) {
    if (shrunk(i) > 0.0) {
      out.matrix.noalias() += (d.left_vectors.col(i) * shrunk(i)) * d.right_vectors.col(i).adjoint();
    }
  }
  std::sort(shrunk.begin(), shrunk.end(), std::greater<>());
  out.singular_values = std::move(shrunk);
  return out;
}

CMatrix svt(const CMatrix& m, const RVector& thresholds) {
  return svt_with_spectrum(m, thresholds).matrix;
}

Index numerical_rank(const CMatrix& m, double tol, bool relative) {
  const RVector s = thin_svd(m).singular_values;
  if (s.size() == 0) {
    return 0;
  }
  const double cutoff = relative ? tol * s(0) : tol;
  return static_cast<Index>((s.array() > cutoff).count());
}

std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::constant: return "constant";
    case DecayKind::log_det: return "log_det";
    case DecayKind::exponential: return "exponential";
  }
  return "unknown";
}

DecayKind parse_decay_kind(std::string_view text) {
  if (text == "constant" || text == "const" || text == "none") return DecayKind::constant;
  if (text == "log_det" || text == "log") return DecayKind::log_det;
  if (text == "exponential" || text == "exp") return DecayKind::exponential;
  throw std::invalid_argument("unknown decay kind '" + std::string(text) + "'");
}

double decay(const DecaySpec& spec, double x) {
  if (!(spec.gamma > 0.0)) {
    throw std::invalid_argument("decay: gamma must be positive");
  }
  if (!(x >= 0.0)) {
    throw std::invalid_argument("decay: argument must be nonnegative");
  }
  switch (spec.kind) {
    case DecayKind::constant: return 1.0;
    case DecayKind::log_det: return 1.0 / (x + spec.gamma);
    case DecayKind::exponential: return std::exp(-x / spec.gamma) / spec.gamma;
  }
  return 1.0;
}

}  // namespace crpca
