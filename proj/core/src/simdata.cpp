#include "mqbsts/simdata.hpp"

#include <cmath>
#include <string>

#include "mqbsts/distributions.hpp"
#include "mqbsts/errors.hpp"
#include "mqbsts/rng.hpp"

namespace mqbsts::sim {

namespace {

enum class Law { Normal, Poisson };

struct PredictorLaw {
  Law law;
  double mean;
  double variance;
};

constexpr PredictorLaw kLaws[kPredictors] = {
    {Law::Normal, 5.0, 25.0},  {Law::Poisson, 10.0, 10.0}, {Law::Poisson, 5.0, 5.0},   {Law::Normal, -2.0, 5.0},
    {Law::Normal, -5.0, 25.0}, {Law::Poisson, 15.0, 15.0}, {Law::Poisson, 20.0, 20.0}, {Law::Normal, 0.0, 100.0},
};

}  // namespace

void SimConfig::validate() const {
  if (n <= 0) throw ArgumentError("simulate: n must be positive");
  if (tau.size() != kSeries) throw ArgumentError("simulate: tau needs three entries");
  if ((tau.array() <= 0.0).any() || (tau.array() >= 1.0).any()) {
    throw ArgumentError("simulate: tau entries must lie in (0, 1)");
  }
  if (!(rho > -0.5 && rho < 1.0)) {
    throw ArgumentError("simulate: rho must lie in (-0.5, 1) for a positive-definite equicorrelation");
  }
}

Matrix true_coefficients() {
  Matrix b(kPredictors, kSeries);
  b.col(0) << 2.0, 4.0, -3.5, -2.0, 0.0, 0.0, -1.6, 0.0;
  b.col(1) << 3.0, 0.0, 2.5, -3.0, 0.0, -1.5, 0.0, 2.0;
  b.col(2) << -2.5, 0.0, -2.0, -1.0, 3.0, 2.0, 0.0, 4.0;
  return b;
}

Vector trend_attractor() { return (Vector(kSeries) << 0.04, 0.05, 0.02).finished(); }

Vector trend_persistence() { return (Vector(kSeries) << 0.6, 0.3, 0.1).finished(); }

Vector error_scale() { return (Vector(kSeries) << 0.7, 0.6, 0.9).finished(); }

Matrix equicorrelation(double rho) {
  Matrix c = Matrix::Constant(kSeries, kSeries, rho);
  c.diagonal().setOnes();
  return c;
}

SimResult generate(const SimConfig& config) {
  config.validate();
  const Eigen::Index n = config.n;
  const QuantileSpec tau(config.tau);
  Rng rng(config.seed);

  SimTruth truth;
  truth.b = true_coefficients();
  truth.beta = Eigen::Map<const Vector>(truth.b.data(), truth.b.size());
  truth.d = trend_attractor();
  truth.lambda = trend_persistence();
  truth.link = build_link(error_scale(), tau, equicorrelation(config.rho));

  truth.mu.resize(n, kSeries);
  truth.delta.resize(n, kSeries);
  Vector mu = Vector::Zero(kSeries);
  Vector delta = truth.d;
  for (Eigen::Index t = 0; t < n; ++t) {
    mu += delta;
    delta = truth.d + truth.lambda.cwiseProduct(delta - truth.d);
    truth.mu.row(t) = mu.transpose();
    truth.delta.row(t) = delta.transpose();
  }

  Matrix x(n, kPredictors);
  for (Eigen::Index p = 0; p < kPredictors; ++p) {
    const PredictorLaw& law = kLaws[p];
    for (Eigen::Index t = 0; t < n; ++t) {
      x(t, p) = law.law == Law::Normal ? law.mean + std::sqrt(law.variance) * rng.normal()
                                       : static_cast<double>(rng.poisson(law.mean));
    }
  }

  const SymmetricPD sigma_eps(truth.link.sigma_eps);
  truth.errors.resize(n, kSeries);
  for (Eigen::Index t = 0; t < n; ++t) {
    truth.errors.row(t) = sample_mal(truth.link.phi_eps, sigma_eps, rng).transpose();
  }

  SimResult result;
  result.dataset.y = truth.mu + x * truth.b + truth.errors;
  for (Eigen::Index i = 0; i < kSeries; ++i) {
    result.dataset.predictors.push_back(x);
    result.dataset.series_names.push_back("s" + std::to_string(i + 1));
    std::vector<std::string> names;
    for (Eigen::Index p = 0; p < kPredictors; ++p) names.push_back("x" + std::to_string(p + 1));
    result.dataset.predictor_names.push_back(std::move(names));
  }
  result.truth = std::move(truth);
  return result;
}

}  // namespace mqbsts::sim
