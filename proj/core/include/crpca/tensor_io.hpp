// Binary tensor container and the unfolded-model file.
//
// Tensor file: one ASCII header line
//   CRPCA-TENSOR v1 dtype=c128 shape=450,900 layout=column-major endian=little
// followed by the raw payload. f64 stores one little-endian IEEE double per
// element, c128 stores interleaved (real, imag) pairs.
//
// Model file: one ASCII header line
//   CRPCA-MODEL v1 layers=10 decay=log_det K=450 lowrank=30x30 sparse=30x30
// followed by 4*layers little-endian doubles, per layer in the order
// lambda_S, lambda_L, gamma, rho. The operators are not stored; they are
// reattached from the dataset on load.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "crpca/unfolded.hpp"

namespace crpca {

/// File-system failure or malformed file, with the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType { f64, c128 };

struct Tensor {
  DType dtype = DType::f64;
  std::vector<Index> shape;
  /// Column-major elements; for f64 the imaginary parts are zero.
  CVector data;

  Index rank() const { return static_cast<Index>(shape.size()); }
  /// Requires rank <= 2; a rank-1 tensor becomes a column.
  CMatrix matrix() const;
};

/// c128 unless the matrix is real-valued and `allow_real` is set.
Tensor make_tensor(const CMatrix& m, bool allow_real = true);
Tensor make_vector_tensor(const CVector& v, bool allow_real = true);

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

void write_model(std::ostream& out, const UnfoldedModel& model);
/// Reads the layer scalars and checks them against `ops`.
UnfoldedModel read_model(std::istream& in, const MeasurementOperators& ops);

void save_model(const std::filesystem::path& path, const UnfoldedModel& model);
UnfoldedModel load_model(const std::filesystem::path& path, const MeasurementOperators& ops);

/// Writes `text` to `path`, creating parent directories.
void save_text(const std::filesystem::path& path, const std::string& text);
std::string load_text(const std::filesystem::path& path);

}  // namespace crpca
