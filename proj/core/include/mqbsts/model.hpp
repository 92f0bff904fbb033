#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mqbsts/linalg.hpp"

namespace mqbsts {

// Target quantile level per series, each strictly inside (0, 1).
class QuantileSpec {
public:
  explicit QuantileSpec(Vector tau);
  QuantileSpec(std::initializer_list<double> tau);

  const Vector& values() const noexcept { return tau_; }
  Eigen::Index size() const noexcept { return tau_.size(); }
  double operator[](Eigen::Index i) const { return tau_[i]; }

  // psi_i = (1 - 2 tau_i) / (tau_i (1 - tau_i)), so that P(z_i <= xi_i) = tau_i.
  Vector skew() const;
  // sqrt(2 / (tau_i (1 - tau_i))), the diagonal of the scale matrix Psi.
  Vector scale() const;

private:
  Vector tau_;
};

// n x m targets plus one n x k_i predictor pool per series.
struct Dataset {
  Matrix y;
  std::vector<Matrix> predictors;
  std::vector<std::string> series_names;
  std::vector<std::vector<std::string>> predictor_names;

  Eigen::Index n() const noexcept { return y.rows(); }
  Eigen::Index m() const noexcept { return y.cols(); }
  Eigen::Index k(Eigen::Index series) const { return predictors.at(static_cast<std::size_t>(series)).cols(); }
  Eigen::Index total_predictors() const;
  // Start of series i's coefficients in the stacked K-vector.
  Eigen::Index offset(Eigen::Index series) const;

  // Checks shapes, names and finiteness. Throws DataError.
  void validate() const;

  // Leading rows [0, rows) of every matrix.
  Dataset head(Eigen::Index rows) const;

  // "series.predictor" label per stacked coefficient.
  std::vector<std::string> coefficient_labels() const;

  // FNV-1a over the shape, names, and the bit patterns of every value.
  std::uint64_t fingerprint() const;
};

// Parameters of the multivariate asymmetric Laplace error implied by the
// quantile link: phi_eps = Phi psi, Sigma_eps = Phi Psi Sigma_corr Psi Phi.
struct LinkParams {
  Vector phi_diag;
  Vector phi_tilde;
  Vector psi_diag;
  Matrix sigma_corr;
  Vector phi_eps;
  Matrix sigma_eps;
  Matrix sigma_tau;
};

LinkParams build_link(const Vector& phi_diag, const QuantileSpec& tau, const Matrix& sigma_corr);

// Error location and covariance from a free (non-correlation) Sigma_tau, as used
// during inference and forecasting: (Phi psi, Phi Sigma_tau Phi).
struct ErrorMoments {
  Vector phi_eps;
  Matrix sigma_eps;
};
ErrorMoments error_moments(const Vector& phi_diag, const QuantileSpec& tau, const Matrix& sigma_tau);

// Pinball loss (|u| + (2p - 1) u) / 2.
double quantile_loss(double u, double p);

// mn x K block-diagonal design with X_i as the i-th block.
Matrix assemble_block_X(const Dataset& dataset);

// Series-major stacking: entry i * n + t is z(t, i).
Vector vectorize_by_series(const Matrix& z);
Matrix devectorize_by_series(const Vector& v, Eigen::Index n, Eigen::Index m);

// Inclusion indicators and coefficients over the stacked K predictors.
struct RegressionState {
  Eigen::VectorXi gamma;
  Vector beta;
};

// Per-series fitted regression xi (n x m) from the stacked coefficient vector.
Matrix regression_fit(const Dataset& dataset, const Vector& beta);

}  // namespace mqbsts
