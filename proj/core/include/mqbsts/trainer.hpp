#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mqbsts/linalg.hpp"
#include "mqbsts/model.hpp"
#include "mqbsts/qr_sampler.hpp"
#include "mqbsts/trend.hpp"

namespace mqbsts {

struct McmcConfig {
  int iterations = 400;
  int burn_in = 200;
  std::uint64_t seed = 0;
  double threshold_inclusion = 0.8;
  // Initial Phi diagonal; empty means 0.1 for every series.
  Vector phi_init;
  // Log-scale random-walk step per series; empty means 0.05 for every series.
  Vector phi_step;
  // Tune phi_step toward 30-45% acceptance during burn-in, then freeze it.
  bool adapt_phi_step = true;
  double pi = 0.5;
  double b_gamma = 0.0;
  double kappa = 0.01;
  double r_squared = 0.8;
  double v0 = 5.0;
  double nu_alpha = 0.01;
  double v_alpha = 0.01;
  // Divide the trend increment cross-product by W in the Sigma_alpha update.
  // Off by default: the state draw uses unscaled Sigma_alpha, and the scaled
  // update then inflates Sigma_alpha by 1/W every sweep.
  bool scale_trend_by_w = false;
  WExponent w_exponent = WExponent::Joint;
  bool trend = true;
  // Trend hyperparameters; empty means D = 0, lambda = 1.
  Vector trend_d;
  Vector trend_lambda;

  // Throws ArgumentError on out-of-range fields; m is the number of series.
  void validate(Eigen::Index m) const;
  TrendHyper trend_hyper(Eigen::Index m) const;
  Vector resolved_phi_init(Eigen::Index m) const;
  Vector resolved_phi_step(Eigen::Index m) const;
};

struct McmcDraw {
  int iteration = 0;
  // Full paths after training; a draws table restores only the last row.
  std::optional<TrendPaths> trend;
  std::optional<TrendCovariances> trend_cov;
  Eigen::VectorXi gamma;
  Vector beta;
  SymmetricPD sigma_tau;
  Vector phi_diag;
  double w = 1.0;
};

struct DataFingerprint {
  Eigen::Index rows = 0;
  Eigen::Index series = 0;
  Eigen::Index predictors = 0;
  std::uint64_t hash = 0;

  static DataFingerprint of(const Dataset& dataset);
  bool operator==(const DataFingerprint&) const = default;
};

struct PosteriorSample {
  std::vector<McmcDraw> draws;
  McmcConfig config;
  QuantileSpec tau{0.5};
  TrendHyper hyper;
  DataFingerprint fingerprint;
  std::vector<std::string> labels;
  // Per-series Phi acceptance rate over retained iterations, and the frozen step sizes.
  Vector phi_acceptance;
  Vector phi_step;
};

// V0 = (v0 - m - 1)(1 - R^2) Sigma_y with Sigma_y the sample covariance of the targets.
Matrix prior_sigma_tau_scale(const Matrix& y, double v0, double r_squared);

// Runs the Gibbs sampler: trend states, trend covariances, SSVS sweep, beta,
// Sigma_tau, Phi, W, in that order every iteration.
PosteriorSample train(const Dataset& dataset, const QuantileSpec& tau, const McmcConfig& config);

// Independent chains run concurrently; chain c is seeded from Rng(seed).split(c).
std::vector<PosteriorSample> train_chains(const Dataset& dataset, const QuantileSpec& tau,
                                          const McmcConfig& config, int chains);

struct InclusionTable {
  std::vector<std::string> labels;
  Vector probability;

  Eigen::VectorXi selected(double threshold) const;
};

InclusionTable inclusion_probabilities(const PosteriorSample& sample);

struct CoefficientSummary {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;
  // |(mean - truth) / truth|, present only for nonzero truths.
  std::optional<double> normalized_error;
};

std::vector<CoefficientSummary> posterior_coefficient_summary(const PosteriorSample& sample,
                                                              const std::optional<Vector>& truth = std::nullopt);

}  // namespace mqbsts
