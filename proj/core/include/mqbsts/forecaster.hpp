#pragma once

#include <optional>
#include <vector>

#include "mqbsts/linalg.hpp"
#include "mqbsts/model.hpp"
#include "mqbsts/rng.hpp"
#include "mqbsts/trainer.hpp"
#include "mqbsts/trend.hpp"

namespace mqbsts {

struct ForecastOptions {
  // Trend steps beyond the last training row; 1 is the usual one-step forecast.
  int trend_steps = 1;
  // Replace trend innovations by zero and the error term by its mean phi_eps.
  bool suppress_noise = false;
};

struct ForecastResult {
  // Forecast row index (0-based) in the full series.
  Eigen::Index horizon = 0;
  // One row of simulated y per retained draw.
  Matrix per_draw;
  Vector prediction;
  // Averaged trend, regression and error contributions; they sum to prediction.
  Vector trend_mean;
  Vector regression_mean;
  Vector error_mean;
};

// Model-averaged forecast. new_predictors holds one k_i-vector per series.
// Each retained draw contributes one simulated row: advanced trend, regression
// fit, and one MAL error built from that draw's Phi, Sigma_tau and tau.
ForecastResult forecast_one_step(const PosteriorSample& sample, const std::vector<Vector>& new_predictors,
                                 const QuantileSpec& tau, const TrendHyper& hyper, Rng& rng,
                                 const ForecastOptions& options = {});

// Per-series pinball loss of prediction against realized.
Vector forecast_loss(const Vector& prediction, const Vector& realized, const QuantileSpec& tau);

// Per-series tau_i-th empirical quantile with linear interpolation between order
// statistics at position (n - 1) tau.
Vector baseline_empirical_quantile(const Matrix& targets, const QuantileSpec& tau);

struct RollingOptions {
  // Refit on the expanding window at every step; otherwise fit once and extend the trend.
  bool refit = true;
  // Initial training length; 0 means n - steps.
  Eigen::Index initial_window = 0;
};

struct RollingStep {
  Eigen::Index row = 0;
  Vector prediction;
  Vector baseline;
  Vector realized;
  Vector loss;
  Vector baseline_loss;
  double cumulative_loss = 0.0;
  double baseline_cumulative_loss = 0.0;
};

// One-step-ahead forecasts for rows n0 .. n0 + steps - 1, each trained on all
// earlier rows, with the running total of summed per-series pinball loss.
std::vector<RollingStep> rolling_evaluate(const Dataset& dataset, const QuantileSpec& tau, const McmcConfig& config,
                                          int steps, const RollingOptions& options = {});

}  // namespace mqbsts
