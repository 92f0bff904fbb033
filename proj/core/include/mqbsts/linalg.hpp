#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace mqbsts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Pivot threshold relative to the Frobenius norm of the input.
inline constexpr double kPivotTolerance = 1e-12;
// Relative asymmetry accepted by SymmetricPD.
inline constexpr double kSymmetryTolerance = 1e-12;

// Lower-triangular L with L L^T = sigma. Throws DecompositionError naming the
// first pivot that is not > kPivotTolerance * ||sigma||_F.
Matrix cholesky_lower(const Matrix& sigma);

// Upper-triangular U with U^T U = sigma and positive diagonal.
Matrix cholesky_upper(const Matrix& sigma);

// log|sigma| from its lower Cholesky factor.
double log_det_from_cholesky(const Matrix& lower);

// (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

// Symmetric positive-definite matrix; construction validates symmetry and
// factorizability and keeps the lower Cholesky factor.
class SymmetricPD {
public:
  explicit SymmetricPD(const Matrix& entries);

  static SymmetricPD identity(Eigen::Index dim) { return SymmetricPD(Matrix::Identity(dim, dim)); }

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  const Matrix& lower() const noexcept { return lower_; }
  Matrix upper() const { return lower_.transpose(); }
  double log_det() const { return log_det_from_cholesky(lower_); }
  // sigma^{-1} b via the stored factor.
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;

private:
  Matrix entries_;
  Matrix lower_;
};

// Restrict a vector / the columns / rows+columns of a matrix to the entries
// where mask[k] != 0. Order is preserved.
Vector restrict_vector(const Vector& v, const Eigen::VectorXi& mask);
Matrix restrict_columns(const Matrix& m, const Eigen::VectorXi& mask);
Matrix restrict_square(const Matrix& m, const Eigen::VectorXi& mask);
// Inverse of restrict_vector: scatter active values into a zero vector of length mask.size().
Vector expand_vector(const Vector& active, const Eigen::VectorXi& mask);

}  // namespace mqbsts
