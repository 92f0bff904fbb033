#include "mqbsts/linalg.hpp"

#include <cmath>
#include <string>

#include "mqbsts/errors.hpp"

namespace mqbsts {

Matrix cholesky_lower(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw ArgumentError("cholesky: matrix is not square");
  }
  const Eigen::Index n = sigma.rows();
  const double threshold = kPivotTolerance * sigma.norm();
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = sigma(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      pivot -= lower(j, k) * lower(j, k);
    }
    if (!(pivot > threshold)) {
      throw DecompositionError("cholesky: non-positive pivot at index " + std::to_string(j) +
                                   " (value " + std::to_string(pivot) + ")",
                               static_cast<std::size_t>(j));
    }
    const double diag = std::sqrt(pivot);
    lower(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (Eigen::Index k = 0; k < j; ++k) {
        s -= lower(i, k) * lower(j, k);
      }
      lower(i, j) = s / diag;
    }
  }
  return lower;
}

Matrix cholesky_upper(const Matrix& sigma) { return cholesky_lower(sigma).transpose(); }

double log_det_from_cholesky(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

SymmetricPD::SymmetricPD(const Matrix& entries) : entries_(entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw ArgumentError("SymmetricPD: matrix must be square and non-empty");
  }
  const double scale = entries.norm();
  if ((entries - entries.transpose()).norm() > kSymmetryTolerance * scale) {
    throw ArgumentError("SymmetricPD: matrix is not symmetric");
  }
  entries_ = symmetrize(entries);
  lower_ = cholesky_lower(entries_);
}

Matrix SymmetricPD::solve(const Matrix& b) const {
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SymmetricPD::inverse() const {
  return symmetrize(solve(Matrix::Identity(dim(), dim())));
}

namespace {

Eigen::Index active_count(const Eigen::VectorXi& mask) {
  return (mask.array() != 0).count();
}

}  // namespace

Vector restrict_vector(const Vector& v, const Eigen::VectorXi& mask) {
  if (v.size() != mask.size()) {
    throw ArgumentError("restrict: vector length does not match indicator length");
  }
  Vector out(active_count(mask));
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    if (mask[k] != 0) {
      out[j++] = v[k];
    }
  }
  return out;
}

Matrix restrict_columns(const Matrix& m, const Eigen::VectorXi& mask) {
  if (m.cols() != mask.size()) {
    throw ArgumentError("restrict: column count does not match indicator length");
  }
  Matrix out(m.rows(), active_count(mask));
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    if (mask[k] != 0) {
      out.col(j++) = m.col(k);
    }
  }
  return out;
}

Matrix restrict_square(const Matrix& m, const Eigen::VectorXi& mask) {
  if (m.rows() != mask.size() || m.cols() != mask.size()) {
    throw ArgumentError("restrict: matrix dimension does not match indicator length");
  }
  const Eigen::Index n = active_count(mask);
  Matrix out(n, n);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < mask.size(); ++j) {
      if (mask[j] == 0) continue;
      out(r, c++) = m(i, j);
    }
    ++r;
  }
  return out;
}

Vector expand_vector(const Vector& active, const Eigen::VectorXi& mask) {
  if (active.size() != active_count(mask)) {
    throw ArgumentError("expand: active vector length does not match indicator support");
  }
  Vector out = Vector::Zero(mask.size());
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    if (mask[k] != 0) {
      out[k] = active[j++];
    }
  }
  return out;
}

}  // namespace mqbsts
