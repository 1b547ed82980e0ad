// Measurement operator pair (A_l, A_s) of the compressive low-rank + sparse
// model  y = A_l vec(L) + A_s vec(S) + n,  together with the cached
// back-projection ("adjoint") used by the proximal updates.

#pragma once

#include <memory>
#include <string_view>

#include "crpca/numerics.hpp"

namespace crpca {

/// hermitian: A^H / ||A||_2^2. pseudoinverse: the Moore-Penrose inverse.
enum class AdjointMode { hermitian, pseudoinverse };

std::string_view to_string(AdjointMode mode);
AdjointMode parse_adjoint_mode(std::string_view text);

/// Dense K x n operator. Keeps a real copy when every entry is real so that
/// products with real data skip the imaginary half entirely.
class DenseOperator {
 public:
  explicit DenseOperator(CMatrix matrix);

  const CMatrix& matrix() const { return matrix_; }
  bool real_valued() const { return real_valued_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

  /// matrix() * x for a column-stacked batch x.
  CMatrix apply(const CMatrix& x) const;

 private:
  CMatrix matrix_;
  RMatrix real_;
  bool real_valued_ = false;
};

/// The operator pair plus cached back-projections A_l^*, A_s^*.
///
/// A_l acts on vec(L) with L of lowrank_shape; A_s acts on vec(S) with S of
/// sparse_shape. Both map into the same K-dimensional measurement space. The
/// two shapes coincide for the Gaussian model; for the radar model S is the
/// grid image and A_s = Phi * D.
class MeasurementOperators {
 public:
  static MeasurementOperators create(CMatrix lowrank_op, CMatrix sparse_op, Shape lowrank_shape,
                                     Shape sparse_shape, AdjointMode mode);

  /// Same forward operators, different back-projection.
  MeasurementOperators with_adjoint(AdjointMode mode) const;

  Index measurements() const { return lowrank_->rows(); }
  Shape lowrank_shape() const { return lowrank_shape_; }
  Shape sparse_shape() const { return sparse_shape_; }
  AdjointMode adjoint_mode() const { return mode_; }
  /// True when A_l and A_s are the same matrix.
  bool shared() const { return lowrank_ == sparse_; }

  const DenseOperator& lowrank() const { return *lowrank_; }
  const DenseOperator& sparse() const { return *sparse_; }
  const DenseOperator& lowrank_adjoint() const { return *lowrank_adjoint_; }
  const DenseOperator& sparse_adjoint() const { return *sparse_adjoint_; }

  /// A_l vec(L) and A_s vec(S) for a single matrix.
  CVector apply_lowrank(const CMatrix& l) const;
  CVector apply_sparse(const CMatrix& s) const;
  /// A_l vec(L) + A_s vec(S).
  CVector forward(const CMatrix& l, const CMatrix& s) const;

  /// Largest |A A^* A - A| entry relative to max |A|, for both operators.
  double adjoint_consistency_error() const;

 private:
  std::shared_ptr<const DenseOperator> lowrank_;
  std::shared_ptr<const DenseOperator> sparse_;
  std::shared_ptr<const DenseOperator> lowrank_adjoint_;
  std::shared_ptr<const DenseOperator> sparse_adjoint_;
  Shape lowrank_shape_;
  Shape sparse_shape_;
  AdjointMode mode_ = AdjointMode::hermitian;
};

/// Moore-Penrose pseudoinverse.
CMatrix pseudoinverse(const CMatrix& a);

}  // namespace crpca
