#pragma once

#include <cstdint>

#include "mqbsts/linalg.hpp"
#include "mqbsts/model.hpp"

namespace mqbsts::sim {

inline constexpr Eigen::Index kSeries = 3;
inline constexpr Eigen::Index kPredictors = 8;

struct SimConfig {
  Eigen::Index n = 500;
  Vector tau = Vector::Constant(kSeries, 0.9);
  double rho = 0.7;
  std::uint64_t seed = 0;

  // Throws ArgumentError unless n > 0, tau has three entries in (0, 1), and
  // the equicorrelation matrix with off-diagonal rho is positive definite.
  void validate() const;
};

// Ground truth behind a simulated dataset.
struct SimTruth {
  Matrix b;             // 8 x 3, column i holds series i's coefficients
  Vector beta;          // stacked series-major, length 24
  Matrix mu;            // n x 3 level path
  Matrix delta;         // n x 3 slope path
  Vector d;             // slope attractor
  Vector lambda;        // slope persistence
  LinkParams link;
  Matrix errors;        // n x 3 MAL draws
  double x4_variance = 5.0;
};

struct SimResult {
  Dataset dataset;
  SimTruth truth;
};

// Fixed design constants.
Matrix true_coefficients();
Vector trend_attractor();
Vector trend_persistence();
Vector error_scale();
Matrix equicorrelation(double rho);

// y_t = mu_t + B^T x_t + eps_t with a deterministic trend started at its fixed
// point (delta_0 = D, mu_0 = 0), shared predictors drawn predictor by predictor
// and then by time, and eps_t ~ MAL built from the quantile link.
SimResult generate(const SimConfig& config);

}  // namespace mqbsts::sim
