#include <doctest.h>

#include "mqbsts/errors.hpp"
#include "mqbsts/forecaster.hpp"
#include "mqbsts/simdata.hpp"

using namespace mqbsts;

namespace {

McmcDraw make_draw(const Vector& beta, const Vector& phi, const Matrix& sigma_tau) {
  McmcDraw d{0, std::nullopt, std::nullopt, Eigen::VectorXi::Ones(beta.size()), beta, SymmetricPD(sigma_tau), phi, 1.0};
  return d;
}

PosteriorSample two_series_sample(int copies, bool with_trend) {
  PosteriorSample s;
  s.tau = QuantileSpec{0.3, 0.8};
  s.fingerprint.rows = 10;
  s.labels = {"s1.a", "s1.b", "s2.a"};
  Matrix sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 2.0;
  McmcDraw d = make_draw((Vector(3) << 1.0, -2.0, 0.5).finished(), (Vector(2) << 0.7, 1.1).finished(), sigma);
  if (with_trend) {
    d.trend = TrendPaths{(Matrix(2, 2) << 0.0, 0.0, 3.0, -1.0).finished(),
                         (Matrix(2, 2) << 0.0, 0.0, 0.5, 0.2).finished()};
    d.trend_cov = TrendCovariances{SymmetricPD(0.01 * Matrix::Identity(2, 2)), SymmetricPD(0.02 * Matrix::Identity(2, 2))};
  }
  for (int i = 0; i < copies; ++i) {
    d.iteration = i;
    s.draws.push_back(d);
  }
  return s;
}

const std::vector<Vector> kNewX = {(Vector(2) << 2.0, 1.0).finished(), (Vector(1) << 4.0).finished()};

}  // namespace

TEST_CASE("forecast: noiseless limit is trend advance plus regression") {
  const PosteriorSample s = two_series_sample(1, true);
  const QuantileSpec median{0.5, 0.5};
  const TrendHyper hyper{true, (Vector(2) << 0.1, 0.0).finished(), (Vector(2) << 0.5, 1.0).finished()};
  Rng rng(1);
  const auto r = forecast_one_step(s, kNewX, median, hyper, rng, {1, true});
  CHECK(r.prediction[0] == 3.0 + 0.5 + (2.0 - 2.0));
  CHECK(r.prediction[1] == -1.0 + 0.2 + 2.0);
  CHECK(r.error_mean.isZero(0.0));
  CHECK(r.horizon == 10);

  // Two trend steps: the slope follows its own recursion in between.
  const auto r2 = forecast_one_step(s, kNewX, median, hyper, rng, {2, true});
  const double delta1 = 0.1 + 0.5 * (0.5 - 0.1);
  CHECK(r2.prediction[0] == doctest::Approx(3.0 + 0.5 + delta1 + 0.0));
  CHECK(r2.horizon == 11);
}

TEST_CASE("forecast: averaged MAL error approaches phi_eps") {
  const int draws = 100000;
  const PosteriorSample s = two_series_sample(draws, false);
  const QuantileSpec tau{0.3, 0.8};
  Rng rng(2);
  const auto r = forecast_one_step(s, kNewX, tau, TrendHyper::disabled(2), rng);
  const ErrorMoments em = error_moments(s.draws[0].phi_diag, tau, s.draws[0].sigma_tau.matrix());
  const Vector xi = (Vector(2) << 0.0, 2.0).finished();
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double sd = std::sqrt(em.sigma_eps(i, i) + em.phi_eps[i] * em.phi_eps[i]);
    CHECK(std::abs(r.prediction[i] - (xi[i] + em.phi_eps[i])) < 4.0 * sd / std::sqrt(draws));
  }
}

TEST_CASE("forecast: averaging linearity and per-draw mean") {
  const PosteriorSample s = two_series_sample(50, true);
  Rng rng(3);
  const auto r = forecast_one_step(s, kNewX, s.tau, TrendHyper::local_linear(2), rng);
  CHECK(r.per_draw.rows() == 50);
  const Vector sum = r.trend_mean + r.regression_mean + r.error_mean;
  CHECK((r.prediction - sum).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.prediction - r.per_draw.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forecast: invariant to the tau label at the median without noise") {
  PosteriorSample a = two_series_sample(5, true);
  PosteriorSample b = a;
  b.tau = QuantileSpec{0.9, 0.1};
  const QuantileSpec median{0.5, 0.5};
  Rng r1(4), r2(99);
  const auto fa = forecast_one_step(a, kNewX, median, TrendHyper::local_linear(2), r1, {1, true});
  const auto fb = forecast_one_step(b, kNewX, median, TrendHyper::local_linear(2), r2, {1, true});
  CHECK(fa.prediction == fb.prediction);
  CHECK(fa.prediction == fa.trend_mean + fa.regression_mean);
}

TEST_CASE("forecast: deterministic given sample and rng seed") {
  const PosteriorSample s = two_series_sample(20, true);
  Rng r1(5), r2(5);
  const auto a = forecast_one_step(s, kNewX, s.tau, TrendHyper::local_linear(2), r1);
  const auto b = forecast_one_step(s, kNewX, s.tau, TrendHyper::local_linear(2), r2);
  CHECK(a.per_draw == b.per_draw);
}

TEST_CASE("forecast: dimension and state errors") {
  const PosteriorSample s = two_series_sample(2, false);
  Rng rng(6);
  const std::vector<Vector> short_x = {(Vector(1) << 2.0).finished(), (Vector(1) << 4.0).finished()};
  CHECK_THROWS_AS(forecast_one_step(s, short_x, s.tau, TrendHyper::disabled(2), rng), ArgumentError);
  CHECK_THROWS_AS(forecast_one_step(s, {kNewX[0]}, s.tau, TrendHyper::disabled(2), rng), ArgumentError);
  CHECK_THROWS_AS(forecast_one_step(s, kNewX, s.tau, TrendHyper::local_linear(2), rng), ArgumentError);
  CHECK_THROWS_AS(forecast_one_step(PosteriorSample{}, kNewX, s.tau, TrendHyper::disabled(2), rng), ArgumentError);
}

TEST_CASE("loss and empirical-quantile baseline") {
  CHECK(forecast_loss(Vector::Constant(2, 1.0), Vector::Constant(2, 1.0), QuantileSpec{0.1, 0.9}).isZero(0.0));
  const Vector l = forecast_loss((Vector(2) << 0.0, 0.0).finished(), (Vector(2) << 1.0, -1.0).finished(),
                                 QuantileSpec{0.9, 0.9});
  CHECK(l[0] == doctest::Approx(0.9));
  CHECK(l[1] == doctest::Approx(0.1));

  Matrix seq(100, 2);
  for (int i = 0; i < 100; ++i) {
    seq(i, 0) = 100 - i;
    seq(i, 1) = 7.25;
  }
  const Vector med = baseline_empirical_quantile(seq, QuantileSpec{0.5, 0.5});
  CHECK(med[0] == doctest::Approx(50.5));
  CHECK(med[1] == 7.25);
  const Vector q90 = baseline_empirical_quantile(seq, QuantileSpec{0.9, 0.3});
  CHECK(q90[0] == doctest::Approx(90.1));
  CHECK(q90[1] == 7.25);
  CHECK(baseline_empirical_quantile(Matrix::Constant(1, 1, 3.0), QuantileSpec{0.2})[0] == 3.0);
}

TEST_CASE("rolling evaluation: bookkeeping on a short run") {
  sim::SimConfig sc;
  sc.n = 60;
  sc.seed = 8;
  const auto data = sim::generate(sc).dataset;
  const QuantileSpec tau{0.9, 0.9, 0.9};
  McmcConfig c;
  c.iterations = 30;
  c.burn_in = 15;
  c.seed = 9;

  CHECK(rolling_evaluate(data, tau, c, 0).empty());
  CHECK_THROWS_AS(rolling_evaluate(data, tau, c, 61), ArgumentError);
  CHECK_THROWS_AS(rolling_evaluate(data, tau, c, 3, {true, 58}), ArgumentError);

  for (const bool refit : {true, false}) {
    const auto steps = rolling_evaluate(data, tau, c, 3, {refit, 0});
    REQUIRE(steps.size() == 3);
    double cumulative = 0.0, base_cumulative = 0.0;
    for (std::size_t h = 0; h < 3; ++h) {
      const auto& s = steps[h];
      CHECK(s.row == static_cast<Eigen::Index>(57 + h));
      CHECK(s.realized == data.y.row(s.row).transpose());
      CHECK((s.loss - forecast_loss(s.prediction, s.realized, tau)).norm() < 1e-12);
      const Eigen::Index window = refit ? s.row : 57;
      CHECK((s.baseline - baseline_empirical_quantile(data.y.topRows(window), tau)).norm() < 1e-12);
      cumulative += s.loss.sum();
      base_cumulative += s.baseline_loss.sum();
      CHECK(s.cumulative_loss == doctest::Approx(cumulative));
      CHECK(s.baseline_cumulative_loss == doctest::Approx(base_cumulative));
    }
    const auto again = rolling_evaluate(data, tau, c, 3, {refit, 0});
    CHECK(again.back().cumulative_loss == steps.back().cumulative_loss);
  }
}

TEST_CASE("forecast: predictions increase with tau on simulated data") {
  sim::SimConfig sc;
  sc.n = 200;
  sc.seed = 10;
  const auto data = sim::generate(sc).dataset;
  const Dataset train_part = data.head(199);
  std::vector<Vector> next;
  for (Eigen::Index i = 0; i < 3; ++i) next.push_back(data.predictors[static_cast<std::size_t>(i)].row(199).transpose());
  McmcConfig c;
  c.iterations = 200;
  c.burn_in = 100;
  c.seed = 11;
  Vector predictions[2];
  int idx = 0;
  for (const double t : {0.1, 0.9}) {
    const QuantileSpec tau{t, t, t};
    const auto sample = train(train_part, tau, c);
    Rng rng(12);
    predictions[idx++] = forecast_one_step(sample, next, tau, sample.hyper, rng).prediction;
  }
  for (Eigen::Index i = 0; i < 3; ++i) {
    CAPTURE(i);
    CHECK(predictions[1][i] > predictions[0][i]);
  }
}
