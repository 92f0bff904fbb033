#pragma once

#include "mqbsts/linalg.hpp"
#include "mqbsts/model.hpp"
#include "mqbsts/rng.hpp"

namespace mqbsts {

// Local linear trend with mean-reverting slope:
//   mu_{t+1}    = mu_t + delta_t + u_t,                 u_t ~ N(0, Sigma_mu)
//   delta_{t+1} = D + lambda .* (delta_t - D) + v_t,     v_t ~ N(0, Sigma_delta)
// D = 0, lambda = 1 gives the plain local linear trend.
struct TrendHyper {
  bool enabled = true;
  Vector D;
  Vector lambda;

  static TrendHyper local_linear(Eigen::Index m) {
    return {true, Vector::Zero(m), Vector::Ones(m)};
  }
  static TrendHyper disabled(Eigen::Index m) {
    return {false, Vector::Zero(m), Vector::Ones(m)};
  }
  void validate(Eigen::Index m) const;
};

// Latent level and slope paths, n x m each.
struct TrendPaths {
  Matrix mu;
  Matrix delta;
};

// Diffuse variance of the initial state.
inline constexpr double kDiffuseInitialVariance = 1e6;

// Joint draw of (mu_{1:n}, delta_{1:n}) from the Gaussian smoothing distribution of
// the trend state-space model whose observation equation is
//   y_t - xi_t - phi_eps W = mu_t + sqrt(W) e_t,   e_t ~ N(0, Sigma_eps),
// with initial state N((y*_1, D), 1e6 I). Durbin–Koopman mean-correction smoother.
TrendPaths draw_trend_states(const Matrix& y, const Matrix& xi, const ErrorMoments& errors, double w,
                             const TrendHyper& hyper, const SymmetricPD& sigma_mu,
                             const SymmetricPD& sigma_delta, Rng& rng);

// Smoothed mean E[alpha | y] for the same model (no simulation); exposed for tests
// and diagnostics. Returns paths in the same layout as draw_trend_states.
TrendPaths smooth_trend_mean(const Matrix& y, const Matrix& xi, const ErrorMoments& errors, double w,
                             const TrendHyper& hyper, const SymmetricPD& sigma_mu,
                             const SymmetricPD& sigma_delta);

// Increments of the level and slope recursions, (n-1) x m each.
Matrix level_residuals(const TrendPaths& paths);
Matrix slope_residuals(const TrendPaths& paths, const TrendHyper& hyper);

struct TrendCovariances {
  SymmetricPD sigma_mu;
  SymmetricPD sigma_delta;
};

// Sigma_alpha ~ IW(nu_alpha + (n-1), V_alpha + s A^T A) for both recursions, where
// s = 1/W when scale_by_w is set and 1 otherwise.
TrendCovariances draw_trend_covariances(const TrendPaths& paths, const TrendHyper& hyper, double w,
                                        double nu_alpha, const SymmetricPD& v_alpha, bool scale_by_w,
                                        Rng& rng);

}  // namespace mqbsts
