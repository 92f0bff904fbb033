#include <doctest.h>

#include "mqbsts/errors.hpp"
#include "mqbsts/simdata.hpp"

using namespace mqbsts;

namespace {

sim::SimResult generate(Eigen::Index n, std::uint64_t seed, double rho = 0.7, double tau = 0.9) {
  sim::SimConfig c;
  c.n = n;
  c.seed = seed;
  c.rho = rho;
  c.tau = Vector::Constant(3, tau);
  return sim::generate(c);
}

}  // namespace

TEST_CASE("simdata: single row, bit-identical regeneration") {
  const auto a = generate(1, 42);
  const auto b = generate(1, 42);
  CHECK(a.dataset.n() == 1);
  CHECK(a.dataset.y == b.dataset.y);
  for (int i = 0; i < 3; ++i) CHECK(a.dataset.predictors[i] == b.dataset.predictors[i]);
  CHECK(a.dataset.fingerprint() == b.dataset.fingerprint());
  CHECK(a.dataset.fingerprint() != generate(1, 43).dataset.fingerprint());
}

TEST_CASE("simdata: coefficient matrix and its zero pattern") {
  const Matrix b = sim::true_coefficients();
  REQUIRE(b.rows() == 8);
  REQUIRE(b.cols() == 3);
  const Vector c1 = (Vector(8) << 2, 4, -3.5, -2, 0, 0, -1.6, 0).finished();
  const Vector c2 = (Vector(8) << 3, 0, 2.5, -3, 0, -1.5, 0, 2).finished();
  const Vector c3 = (Vector(8) << -2.5, 0, -2, -1, 3, 2, 0, 4).finished();
  CHECK(b.col(0) == c1);
  CHECK(b.col(1) == c2);
  CHECK(b.col(2) == c3);
  CHECK((b.array() == 0.0).count() == 8);
  const auto truth = generate(5, 1).truth;
  CHECK(truth.beta.segment(0, 8) == c1);
  CHECK(truth.beta.segment(16, 8) == c3);
  CHECK((truth.beta.array() != 0.0).count() == 16);
}

TEST_CASE("simdata: shared predictors, names, layout") {
  const auto r = generate(30, 2);
  const auto& d = r.dataset;
  CHECK_NOTHROW(d.validate());
  CHECK(d.m() == 3);
  CHECK(d.predictors[0] == d.predictors[1]);
  CHECK(d.predictors[0] == d.predictors[2]);
  CHECK(d.series_names == std::vector<std::string>{"s1", "s2", "s3"});
  CHECK(d.predictor_names[0].front() == "x1");
  CHECK(d.predictor_names[0].back() == "x8");
  const Matrix fit = r.truth.mu + d.predictors[0] * r.truth.b + r.truth.errors;
  CHECK((fit - d.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simdata: deterministic trend, identical across seeds") {
  const auto a = generate(50, 3);
  const auto b = generate(50, 4);
  CHECK(a.truth.mu == b.truth.mu);
  CHECK(a.truth.delta == b.truth.delta);
  const Vector d = sim::trend_attractor();
  CHECK(d == (Vector(3) << 0.04, 0.05, 0.02).finished());
  CHECK(sim::trend_persistence() == (Vector(3) << 0.6, 0.3, 0.1).finished());
  for (Eigen::Index t = 0; t < 50; ++t) {
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(a.truth.delta(t, i) == doctest::Approx(d[i]));
    if (t > 0) {
      CHECK((a.truth.mu.row(t) - a.truth.mu.row(t - 1) - a.truth.delta.row(t - 1)).norm() < 1e-12);
    }
  }
}

TEST_CASE("simdata: error draws have the quantile property and mixture moments") {
  const Eigen::Index n = 100000;
  const auto r = generate(n, 5);
  const Matrix resid = r.dataset.y - r.truth.mu - r.dataset.predictors[0] * r.truth.b;
  CHECK((resid - r.truth.errors).cwiseAbs().maxCoeff() < 1e-9);
  const LinkParams& link = r.truth.link;
  CHECK(link.phi_diag == sim::error_scale());
  CHECK((link.sigma_corr - sim::equicorrelation(0.7)).norm() < 1e-15);
  const Matrix target_cov = link.sigma_eps + link.phi_eps * link.phi_eps.transpose();
  const Vector mean = resid.colwise().mean().transpose();
  const Matrix centered = resid.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CAPTURE(i);
    const double below = static_cast<double>((resid.col(i).array() <= 0.0).count()) / static_cast<double>(n);
    CHECK(std::abs(below - 0.9) < 0.005);
    CHECK(std::abs(mean[i] - link.phi_eps[i]) < 3.0 * std::sqrt(target_cov(i, i) / n));
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(std::abs(cov(i, j) - target_cov(i, j)) < 0.05 * std::sqrt(target_cov(i, i) * target_cov(j, j)));
    }
  }
}

TEST_CASE("simdata: predictor marginals") {
  const Eigen::Index n = 100000;
  const auto r = generate(n, 6);
  const Matrix& x = r.dataset.predictors[0];
  const Vector means = (Vector(8) << 5, 10, 5, -2, -5, 15, 20, 0).finished();
  const Vector vars = (Vector(8) << 25, 10, 5, 5, 25, 15, 20, 100).finished();
  for (Eigen::Index k = 0; k < 8; ++k) {
    CAPTURE(k);
    const double mu = x.col(k).mean();
    const double var = (x.col(k).array() - mu).square().sum() / static_cast<double>(n - 1);
    CHECK(std::abs(mu - means[k]) < 4.0 * std::sqrt(vars[k] / n));
    CHECK(var == doctest::Approx(vars[k]).epsilon(0.03));
  }
  for (const Eigen::Index k : {1, 2, 5, 6}) {
    CHECK((x.col(k).array() == x.col(k).array().round()).all());
    CHECK((x.col(k).array() >= 0.0).all());
  }
  CHECK(r.truth.x4_variance == 5.0);
}

TEST_CASE("simdata: configuration checks") {
  sim::SimConfig c;
  c.rho = -0.5;
  CHECK_THROWS_AS(sim::generate(c), ArgumentError);
  c.rho = 1.0;
  CHECK_THROWS_AS(sim::generate(c), ArgumentError);
  c = sim::SimConfig{};
  c.n = 0;
  CHECK_THROWS_AS(sim::generate(c), ArgumentError);
  c = sim::SimConfig{};
  c.tau = Vector::Constant(2, 0.5);
  CHECK_THROWS_AS(sim::generate(c), ArgumentError);
  c = sim::SimConfig{};
  c.rho = -0.4;
  CHECK_NOTHROW(sim::generate(c));
}
