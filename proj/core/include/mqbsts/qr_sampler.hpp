#pragma once

#include <utility>

#include "mqbsts/linalg.hpp"
#include "mqbsts/model.hpp"
#include "mqbsts/rng.hpp"

namespace mqbsts {

// Error-term parameters carried by the chain.
struct ErrorState {
  Vector phi_diag;
  Matrix sigma_tau;
  double w = 1.0;

  void validate() const;
};

// The system after applying ((U Phi)^{-1})^T (x) I_n, where Sigma_tau = U^T U.
// Errors of the transformed system are iid N(0, W) across all mn entries.
struct DecorrelatedSystem {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Vector z_hat;
  Matrix x_hat;
  Vector phi_eps_hat;
};

// z_tilde: series-major mn-vector; x: mn x K block design. Never forms the
// mn x mn Kronecker matrix; each block row is a recombination of series blocks.
DecorrelatedSystem decorrelate(const Vector& z_tilde, const Matrix& x, const Vector& phi_diag,
                               const SymmetricPD& sigma_tau, const QuantileSpec& tau);

// The m x m mixing matrix ((U Phi)^{-1})^T applied per series block.
Matrix decorrelation_matrix(const Vector& phi_diag, const SymmetricPD& sigma_tau);

// Spike-and-slab prior: beta_gamma ~ N(b_gamma, A_gamma^{-1}), gamma_k ~ Bernoulli(pi_k).
struct RegressionPrior {
  Vector b;
  Matrix a;
  Vector pi;

  // A = kappa X^T X / n on the full block design, b = b0, pi = pi0 everywhere.
  static RegressionPrior from_design(const Matrix& x, Eigen::Index n, double kappa, double b0, double pi0);
  void validate(Eigen::Index k) const;
};

// Gram and cross products of the decorrelated system; everything the gamma and
// beta kernels need once (Sigma_tau, Phi) are fixed.
struct ConditionalStats {
  Matrix gram;    // X^T X (hats)
  Vector x_z;     // X^T Z
  Vector x_phi;   // X^T Phi_eps
  static ConditionalStats from(const DecorrelatedSystem& sys);
};

// Conditional posterior of beta_gamma: precision P = W^{-1} X^T X + A and
// shift Xi = W^{-1} X^T Z - X^T Phi_eps + A b on the active set.
struct BetaPosterior {
  Matrix precision;
  Vector shift;
  Vector mean;
};
BetaPosterior beta_posterior(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                             const RegressionPrior& prior);

// beta ~ N(mean, P^{-1}) on active coordinates, zero elsewhere.
Vector draw_beta(const DecorrelatedSystem& sys, const Eigen::VectorXi& gamma, double w,
                 const RegressionPrior& prior, Rng& rng);
Vector draw_beta(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                 const RegressionPrior& prior, Rng& rng);

// Unnormalized log p(gamma | Z, Phi, Sigma_tau, W) with beta integrated out:
//   -1/2 [b^T A b - Xi^T P^{-1} Xi] + 1/2 log|A_gamma| - 1/2 log|P_gamma| + log p(gamma).
// The two square-root factors are read as determinants of the active-set matrices.
// Returns -inf when A_gamma or P_gamma is not positive definite.
double log_gamma_mass(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                      const RegressionPrior& prior);

// One SSVS sweep in a fresh uniformly random coordinate order. Coordinates with
// pi_k in {0, 1} are forced.
Eigen::VectorXi draw_gamma_ssvs(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                                const RegressionPrior& prior, Rng& rng);

// Scale matrix (1/W) R^T R + V0 with R = (E - 1 phi_eps^T W) Phi^{-1}, where
// E = Z - X* B is the regression residual (n x m).
Matrix sigma_tau_scale(const Matrix& regression_residual, const Vector& phi_diag, const QuantileSpec& tau,
                       double w, const Matrix& v0);

// Sigma_tau ~ IW_m(v0 + n, sigma_tau_scale(...)).
SymmetricPD draw_sigma_tau(const Matrix& regression_residual, const Vector& phi_diag, const QuantileSpec& tau,
                           double w, double v0, const SymmetricPD& v0_scale, Rng& rng);

// log p(Phi | ...) up to a constant (flat prior on phi):
//   -n sum log phi_i - 1/(2W) || ((E Phi^{-1}) - 1 psi^T W) U^{-1} ||_F^2.
double phi_log_density(const Vector& phi_diag, const Matrix& regression_residual, const SymmetricPD& sigma_tau,
                       const QuantileSpec& tau, double w);

struct PhiUpdate {
  Vector phi_diag;
  Eigen::VectorXi accepted;
};

// One Metropolis–Hastings sweep, random walk on log phi_i per coordinate.
PhiUpdate draw_phi_mh(const Vector& phi_diag, const Matrix& regression_residual, const SymmetricPD& sigma_tau,
                      const QuantileSpec& tau, double w, const Vector& step_sizes, Rng& rng);

// Exponent of the W posterior. Joint: 1 - mn/2, from |W Phi Sigma Phi|^{-n/2} over an
// m-dimensional error. Literal: 1 - n/2.
enum class WExponent { Joint, Literal };

struct GigParams {
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;
};

// a = 2 + Phi_hat^T Phi_hat, b = ||Z_hat - X_hat beta||^2.
GigParams w_posterior_params(const DecorrelatedSystem& sys, const Vector& beta, WExponent exponent);

double draw_w(const DecorrelatedSystem& sys, const Vector& beta, WExponent exponent, Rng& rng);

}  // namespace mqbsts
