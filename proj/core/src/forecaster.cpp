#include "mqbsts/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mqbsts/distributions.hpp"
#include "mqbsts/errors.hpp"

namespace mqbsts {

namespace {

Vector predictor_row(const Dataset& dataset, Eigen::Index series, Eigen::Index row) {
  return dataset.predictors[static_cast<std::size_t>(series)].row(row).transpose();
}

std::vector<Vector> predictors_at(const Dataset& dataset, Eigen::Index row) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < dataset.m(); ++i) out.push_back(predictor_row(dataset, i, row));
  return out;
}

}  // namespace

ForecastResult forecast_one_step(const PosteriorSample& sample, const std::vector<Vector>& new_predictors,
                                 const QuantileSpec& tau, const TrendHyper& hyper, Rng& rng,
                                 const ForecastOptions& options) {
  if (sample.draws.empty()) throw ArgumentError("forecast: empty posterior sample");
  if (options.trend_steps < 1) throw ArgumentError("forecast: trend_steps must be at least 1");
  const Eigen::Index m = tau.size();
  if (static_cast<Eigen::Index>(new_predictors.size()) != m) {
    throw ArgumentError("forecast: one predictor vector per series is required");
  }
  hyper.validate(m);
  Eigen::Index k_total = 0;
  for (const Vector& x : new_predictors) k_total += x.size();
  const McmcDraw& first = sample.draws.front();
  if (first.beta.size() != k_total) {
    throw ArgumentError("forecast: predictor dimensions do not match the trained pools (expected " +
                        std::to_string(first.beta.size()) + " values, got " + std::to_string(k_total) + ")");
  }

  const Eigen::Index count = static_cast<Eigen::Index>(sample.draws.size());
  ForecastResult result;
  result.horizon = sample.fingerprint.rows + options.trend_steps - 1;
  result.per_draw = Matrix::Zero(count, m);
  result.trend_mean = Vector::Zero(m);
  result.regression_mean = Vector::Zero(m);
  result.error_mean = Vector::Zero(m);

  for (Eigen::Index d = 0; d < count; ++d) {
    const McmcDraw& draw = sample.draws[static_cast<std::size_t>(d)];
    if (draw.phi_diag.size() != m || draw.beta.size() != k_total) {
      throw ArgumentError("forecast: draw dimensions do not match tau");
    }

    Vector trend = Vector::Zero(m);
    if (hyper.enabled) {
      if (!draw.trend || !draw.trend_cov) throw ArgumentError("forecast: trend enabled but draw has no trend state");
      Vector mu = draw.trend->mu.bottomRows<1>().transpose();
      Vector delta = draw.trend->delta.bottomRows<1>().transpose();
      for (int s = 0; s < options.trend_steps; ++s) {
        Vector next_mu = mu + delta;
        Vector next_delta = hyper.D + hyper.lambda.cwiseProduct(delta - hyper.D);
        if (!options.suppress_noise) {
          next_mu += sample_mvn(Vector::Zero(m), draw.trend_cov->sigma_mu, rng);
          next_delta += sample_mvn(Vector::Zero(m), draw.trend_cov->sigma_delta, rng);
        }
        mu = next_mu;
        delta = next_delta;
      }
      trend = mu;
    }

    Vector regression(m);
    Eigen::Index offset = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vector& x = new_predictors[static_cast<std::size_t>(i)];
      regression[i] = draw.beta.segment(offset, x.size()).dot(x);
      offset += x.size();
    }

    const ErrorMoments moments = error_moments(draw.phi_diag, tau, draw.sigma_tau.matrix());
    const Vector error =
        options.suppress_noise ? moments.phi_eps : sample_mal(moments.phi_eps, SymmetricPD(moments.sigma_eps), rng);

    result.per_draw.row(d) = (trend + regression + error).transpose();
    result.trend_mean += trend;
    result.regression_mean += regression;
    result.error_mean += error;
  }
  const double c = static_cast<double>(count);
  result.trend_mean /= c;
  result.regression_mean /= c;
  result.error_mean /= c;
  result.prediction = result.per_draw.colwise().sum().transpose() / c;
  return result;
}

Vector forecast_loss(const Vector& prediction, const Vector& realized, const QuantileSpec& tau) {
  if (prediction.size() != tau.size() || realized.size() != tau.size()) {
    throw ArgumentError("loss: dimension mismatch");
  }
  Vector loss(tau.size());
  for (Eigen::Index i = 0; i < tau.size(); ++i) loss[i] = quantile_loss(realized[i] - prediction[i], tau[i]);
  return loss;
}

Vector baseline_empirical_quantile(const Matrix& targets, const QuantileSpec& tau) {
  if (targets.rows() == 0) throw ArgumentError("baseline: empty training window");
  if (targets.cols() != tau.size()) throw ArgumentError("baseline: tau needs one entry per series");
  const Eigen::Index n = targets.rows();
  Vector out(targets.cols());
  for (Eigen::Index i = 0; i < targets.cols(); ++i) {
    std::vector<double> sorted(targets.col(i).data(), targets.col(i).data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(n - 1) * tau[i];
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    out[i] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  return out;
}

std::vector<RollingStep> rolling_evaluate(const Dataset& dataset, const QuantileSpec& tau, const McmcConfig& config,
                                          int steps, const RollingOptions& options) {
  if (steps < 0) throw ArgumentError("rolling: steps must be nonnegative");
  dataset.validate();
  const Eigen::Index n = dataset.n();
  const Eigen::Index n0 = options.initial_window > 0 ? options.initial_window : n - steps;
  if (n0 < 2 || n0 + steps > n) {
    throw ArgumentError("rolling: not enough rows for the training window plus " + std::to_string(steps) + " steps");
  }
  std::vector<RollingStep> out;
  if (steps == 0) return out;

  const TrendHyper hyper = config.trend_hyper(dataset.m());
  const Rng root(config.seed);
  std::optional<PosteriorSample> fixed;
  if (!options.refit) {
    McmcConfig c = config;
    c.seed = root.split(0).next_u64();
    fixed = train(dataset.head(n0), tau, c);
  }

  double cumulative = 0.0;
  double baseline_cumulative = 0.0;
  for (int h = 0; h < steps; ++h) {
    const Eigen::Index row = n0 + h;
    Rng step_rng = root.split(static_cast<std::uint64_t>(h) + 1);
    ForecastOptions fopts;
    std::optional<PosteriorSample> refit;
    if (options.refit) {
      McmcConfig c = config;
      c.seed = step_rng.next_u64();
      refit = train(dataset.head(row), tau, c);
    } else {
      fopts.trend_steps = h + 1;
    }
    const PosteriorSample& sample = options.refit ? *refit : *fixed;
    const ForecastResult f = forecast_one_step(sample, predictors_at(dataset, row), tau, hyper, step_rng, fopts);

    RollingStep s;
    s.row = row;
    s.prediction = f.prediction;
    s.baseline = baseline_empirical_quantile(dataset.y.topRows(options.refit ? row : n0), tau);
    s.realized = dataset.y.row(row).transpose();
    s.loss = forecast_loss(s.prediction, s.realized, tau);
    s.baseline_loss = forecast_loss(s.baseline, s.realized, tau);
    cumulative += s.loss.sum();
    baseline_cumulative += s.baseline_loss.sum();
    s.cumulative_loss = cumulative;
    s.baseline_cumulative_loss = baseline_cumulative;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mqbsts
