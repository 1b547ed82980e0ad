#include "crpca/operators.hpp"

#include <algorithm>
#include <limits>

namespace crpca {

std::string_view to_string(AdjointMode mode) {
  return mode == AdjointMode::hermitian ? "hermitian" : "pseudoinverse";
}

AdjointMode parse_adjoint_mode(std::string_view text) {
  if (text == "hermitian" || text == "H") return AdjointMode::hermitian;
  if (text == "pseudoinverse" || text == "pinv") return AdjointMode::pseudoinverse;
  throw std::invalid_argument("unknown adjoint mode '" + std::string(text) + "'");
}

DenseOperator::DenseOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    throw std::invalid_argument("operator must be non-empty");
  }
  if (!all_finite(matrix_)) {
    throw std::invalid_argument("operator has non-finite entries");
  }
  real_valued_ = is_real_valued(matrix_);
  if (real_valued_) {
    real_ = matrix_.real();
  }
}

CMatrix DenseOperator::apply(const CMatrix& x) const {
  if (x.rows() != cols()) {
    throw std::invalid_argument("operator applied to input of length " + std::to_string(x.rows()) +
                                ", expected " + std::to_string(cols()));
  }
  if (!real_valued_) {
    return matrix_ * x;
  }
  CMatrix out(rows(), x.cols());
  out.real().noalias() = real_ * x.real();
  if ((x.imag().array() == 0.0).all()) {
    out.imag().setZero();
  } else {
    out.imag().noalias() = real_ * x.imag();
  }
  return out;
}

CMatrix pseudoinverse(const CMatrix& a) {
  const SvdResult d = thin_svd(a);
  const double smax = d.singular_values.size() > 0 ? d.singular_values(0) : 0.0;
  const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) *
                        std::numeric_limits<double>::epsilon() * smax;
  CMatrix vs = d.right_vectors;
  for (Index i = 0; i < d.singular_values.size(); ++i) {
    const double s = d.singular_values(i);
    vs.col(i) *= s > cutoff ? 1.0 / s : 0.0;
  }
  return vs * d.left_vectors.adjoint();
}

namespace {

std::shared_ptr<const DenseOperator> make_adjoint(const DenseOperator& op, AdjointMode mode) {
  if (mode == AdjointMode::hermitian) {
    // Scaled by 1/||A||_2^2 so the back-projection is a stable Landweber
    // step; operators with orthonormal rows are unaffected.
    const double norm = op.rows() > 0 && op.cols() > 0 ? thin_svd(op.matrix()).singular_values(0) : 0.0;
    const double scale = norm > 0.0 ? 1.0 / (norm * norm) : 1.0;
    return std::make_shared<const DenseOperator>(scale * op.matrix().adjoint());
  }
  return std::make_shared<const DenseOperator>(pseudoinverse(op.matrix()));
}

}  // namespace

MeasurementOperators MeasurementOperators::create(CMatrix lowrank_op, CMatrix sparse_op,
                                                  Shape lowrank_shape, Shape sparse_shape,
                                                  AdjointMode mode) {
  if (lowrank_op.rows() != sparse_op.rows()) {
    throw std::invalid_argument("A_l and A_s must have the same number of rows");
  }
  if (lowrank_op.cols() != lowrank_shape.size() || sparse_op.cols() != sparse_shape.size()) {
    throw std::invalid_argument("operator widths do not match the declared component shapes");
  }
  MeasurementOperators ops;
  const bool same = lowrank_op.rows() == sparse_op.rows() && lowrank_op.cols() == sparse_op.cols() &&
                    lowrank_op == sparse_op;
  ops.lowrank_ = std::make_shared<const DenseOperator>(std::move(lowrank_op));
  ops.sparse_ = same ? ops.lowrank_ : std::make_shared<const DenseOperator>(std::move(sparse_op));
  ops.lowrank_shape_ = lowrank_shape;
  ops.sparse_shape_ = sparse_shape;
  return ops.with_adjoint(mode);
}

MeasurementOperators MeasurementOperators::with_adjoint(AdjointMode mode) const {
  MeasurementOperators ops = *this;
  ops.mode_ = mode;
  ops.lowrank_adjoint_ = make_adjoint(*lowrank_, mode);
  ops.sparse_adjoint_ = shared() ? ops.lowrank_adjoint_ : make_adjoint(*sparse_, mode);
  return ops;
}

CVector MeasurementOperators::apply_lowrank(const CMatrix& l) const {
  if (l.rows() != lowrank_shape_.rows || l.cols() != lowrank_shape_.cols) {
    throw std::invalid_argument("low-rank component has the wrong shape");
  }
  return lowrank_->apply(vec(l));
}

CVector MeasurementOperators::apply_sparse(const CMatrix& s) const {
  if (s.rows() != sparse_shape_.rows || s.cols() != sparse_shape_.cols) {
    throw std::invalid_argument("sparse component has the wrong shape");
  }
  return sparse_->apply(vec(s));
}

CVector MeasurementOperators::forward(const CMatrix& l, const CMatrix& s) const {
  return apply_lowrank(l) + apply_sparse(s);
}

double MeasurementOperators::adjoint_consistency_error() const {
  auto err = [](const DenseOperator& a, const DenseOperator& adj) {
    const CMatrix aaa = a.matrix() * (adj.matrix() * a.matrix());
    const double scale = a.matrix().cwiseAbs().maxCoeff();
    return (aaa - a.matrix()).cwiseAbs().maxCoeff() / scale;
  };
  return std::max(err(*lowrank_, *lowrank_adjoint_), err(*sparse_, *sparse_adjoint_));
}

}  // namespace crpca
