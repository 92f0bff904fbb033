#include "mqbsts/trend.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mqbsts/distributions.hpp"
#include "mqbsts/errors.hpp"

namespace mqbsts {

void TrendHyper::validate(Eigen::Index m) const {
  if (D.size() != m || lambda.size() != m) {
    throw ArgumentError("trend: D and lambda must have one entry per series");
  }
  if ((lambda.array() < 0.0).any() || (lambda.array() > 1.0).any()) {
    throw ArgumentError("trend: lambda entries must lie in [0, 1]");
  }
}

namespace {

// State alpha_t = (mu_t, delta_t) in R^{2m}.
struct StateSpace {
  Eigen::Index m = 0;
  Matrix transition;  // T
  Vector intercept;   // c
  Matrix state_cov;   // Q
  Matrix obs_cov;     // H = W Sigma_eps
  Matrix target;      // y*_t rows
  Vector initial_mean;
};

StateSpace make_state_space(const Matrix& y, const Matrix& xi, const ErrorMoments& errors, double w,
                            const TrendHyper& hyper, const SymmetricPD& sigma_mu,
                            const SymmetricPD& sigma_delta) {
  const Eigen::Index n = y.rows();
  const Eigen::Index m = y.cols();
  if (!(w > 0.0)) {
    throw ArgumentError("trend: W must be positive");
  }
  if (xi.rows() != n || xi.cols() != m || errors.phi_eps.size() != m || errors.sigma_eps.rows() != m ||
      sigma_mu.dim() != m || sigma_delta.dim() != m || n == 0) {
    throw ArgumentError("trend: dimension mismatch");
  }
  hyper.validate(m);

  StateSpace ss;
  ss.m = m;
  ss.transition = Matrix::Zero(2 * m, 2 * m);
  ss.transition.topLeftCorner(m, m).setIdentity();
  ss.transition.topRightCorner(m, m).setIdentity();
  ss.transition.bottomRightCorner(m, m) = hyper.lambda.asDiagonal();
  ss.intercept = Vector::Zero(2 * m);
  ss.intercept.tail(m) = (Vector::Ones(m) - hyper.lambda).cwiseProduct(hyper.D);
  ss.state_cov = Matrix::Zero(2 * m, 2 * m);
  ss.state_cov.topLeftCorner(m, m) = sigma_mu.matrix();
  ss.state_cov.bottomRightCorner(m, m) = sigma_delta.matrix();
  ss.obs_cov = w * errors.sigma_eps;
  ss.target = y - xi - Vector::Ones(n) * (w * errors.phi_eps).transpose();
  ss.initial_mean = Vector::Zero(2 * m);
  ss.initial_mean.head(m) = ss.target.row(0).transpose();
  ss.initial_mean.tail(m) = hyper.D;
  return ss;
}

// Fast state smoother: E[alpha | obs] with initial mean a1, intercept c.
// obs is n x m; returns n x 2m.
Matrix state_smoother(const StateSpace& ss, const Matrix& obs, const Vector& a1, const Vector& c) {
  const Eigen::Index n = obs.rows();
  const Eigen::Index m = ss.m;
  const Eigen::Index s = 2 * m;
  const Matrix& T = ss.transition;

  std::vector<Vector> innovations(static_cast<std::size_t>(n));
  std::vector<Matrix> f_lower(static_cast<std::size_t>(n));
  std::vector<Matrix> gains(static_cast<std::size_t>(n));
  Matrix p = kDiffuseInitialVariance * Matrix::Identity(s, s);
  const Matrix p1 = p;
  Vector a = a1;

  for (Eigen::Index t = 0; t < n; ++t) {
    const auto idx = static_cast<std::size_t>(t);
    const Vector v = obs.row(t).transpose() - a.head(m);
    const Matrix f = symmetrize(p.topLeftCorner(m, m) + ss.obs_cov);
    Matrix lower;
    try {
      lower = cholesky_lower(f);
    } catch (const DecompositionError&) {
      throw NumericalError("trend filter: innovation covariance lost positive-definiteness at time " +
                           std::to_string(t + 1));
    }
    // K = T P Z^T F^{-1}
    const Matrix tpz = T * p.leftCols(m);
    const Matrix k = lower.transpose()
                         .triangularView<Eigen::Upper>()
                         .solve(lower.triangularView<Eigen::Lower>().solve(tpz.transpose()))
                         .transpose();
    Matrix l = T;
    l.leftCols(m) -= k;
    a = T * a + c + k * v;
    p = symmetrize(T * p * l.transpose() + ss.state_cov);
    innovations[idx] = v;
    f_lower[idx] = std::move(lower);
    gains[idx] = k;
  }

  // Backward pass: r_{t-1} = Z^T F_t^{-1} v_t + L_t^T r_t.
  std::vector<Vector> r(static_cast<std::size_t>(n) + 1, Vector::Zero(s));
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const auto idx = static_cast<std::size_t>(t);
    const Matrix& lower = f_lower[idx];
    const Vector finv_v = lower.transpose().triangularView<Eigen::Upper>().solve(
        lower.triangularView<Eigen::Lower>().solve(innovations[idx]));
    Matrix l = T;
    l.leftCols(m) -= gains[idx];
    Vector prev = l.transpose() * r[idx + 1];
    prev.head(m) += finv_v;
    r[idx] = prev;
  }

  Matrix smoothed(n, s);
  Vector alpha = a1 + p1 * r[0];
  smoothed.row(0) = alpha.transpose();
  for (Eigen::Index t = 1; t < n; ++t) {
    alpha = T * alpha + c + ss.state_cov * r[static_cast<std::size_t>(t)];
    smoothed.row(t) = alpha.transpose();
  }
  return smoothed;
}

TrendPaths split_paths(const Matrix& states, Eigen::Index m) {
  return {states.leftCols(m), states.rightCols(m)};
}

}  // namespace

TrendPaths smooth_trend_mean(const Matrix& y, const Matrix& xi, const ErrorMoments& errors, double w,
                             const TrendHyper& hyper, const SymmetricPD& sigma_mu,
                             const SymmetricPD& sigma_delta) {
  const StateSpace ss = make_state_space(y, xi, errors, w, hyper, sigma_mu, sigma_delta);
  return split_paths(state_smoother(ss, ss.target, ss.initial_mean, ss.intercept), ss.m);
}

TrendPaths draw_trend_states(const Matrix& y, const Matrix& xi, const ErrorMoments& errors, double w,
                             const TrendHyper& hyper, const SymmetricPD& sigma_mu,
                             const SymmetricPD& sigma_delta, Rng& rng) {
  const StateSpace ss = make_state_space(y, xi, errors, w, hyper, sigma_mu, sigma_delta);
  const Eigen::Index n = y.rows();
  const Eigen::Index m = ss.m;
  const Eigen::Index s = 2 * m;

  SymmetricPD obs_cov(ss.obs_cov);
  const SymmetricPD initial_cov(kDiffuseInitialVariance * Matrix::Identity(s, s));

  // Unconditional draw (alpha+, y+) from the model.
  Matrix alpha_plus(n, s);
  Matrix y_plus(n, m);
  Vector alpha = sample_mvn(ss.initial_mean, initial_cov, rng);
  for (Eigen::Index t = 0; t < n; ++t) {
    alpha_plus.row(t) = alpha.transpose();
    y_plus.row(t) = (alpha.head(m) + sample_mvn(Vector::Zero(m), obs_cov, rng)).transpose();
    Vector noise(s);
    noise.head(m) = sample_mvn(Vector::Zero(m), sigma_mu, rng);
    noise.tail(m) = sample_mvn(Vector::Zero(m), sigma_delta, rng);
    alpha = ss.transition * alpha + ss.intercept + noise;
  }

  // alpha~ = alpha+ + E[alpha | y] - E[alpha | y+]; the difference of smoothed means is
  // the zero-mean smoother applied to y - y+.
  const Matrix correction =
      state_smoother(ss, ss.target - y_plus, Vector::Zero(s), Vector::Zero(s));
  const Matrix draw = alpha_plus + correction;
  if (!draw.allFinite()) {
    throw NumericalError("trend smoother: non-finite state draw");
  }
  return split_paths(draw, m);
}

Matrix level_residuals(const TrendPaths& paths) {
  const Eigen::Index n = paths.mu.rows();
  if (n < 2) return Matrix(0, paths.mu.cols());
  return paths.mu.bottomRows(n - 1) - paths.mu.topRows(n - 1) - paths.delta.topRows(n - 1);
}

Matrix slope_residuals(const TrendPaths& paths, const TrendHyper& hyper) {
  const Eigen::Index n = paths.delta.rows();
  const Eigen::Index m = paths.delta.cols();
  if (n < 2) return Matrix(0, m);
  const Matrix centered = paths.delta.topRows(n - 1) - Vector::Ones(n - 1) * hyper.D.transpose();
  return paths.delta.bottomRows(n - 1) - Vector::Ones(n - 1) * hyper.D.transpose() -
         centered * hyper.lambda.asDiagonal();
}

TrendCovariances draw_trend_covariances(const TrendPaths& paths, const TrendHyper& hyper, double w,
                                        double nu_alpha, const SymmetricPD& v_alpha, bool scale_by_w,
                                        Rng& rng) {
  const Eigen::Index m = paths.mu.cols();
  hyper.validate(m);
  if (!(w > 0.0)) {
    throw ArgumentError("trend covariances: W must be positive");
  }
  if (v_alpha.dim() != m || paths.delta.cols() != m || paths.delta.rows() != paths.mu.rows()) {
    throw ArgumentError("trend covariances: dimension mismatch");
  }
  const double factor = scale_by_w ? 1.0 / w : 1.0;
  const Matrix level = level_residuals(paths);
  const Matrix slope = slope_residuals(paths, hyper);
  const double df = nu_alpha + static_cast<double>(level.rows());
  SymmetricPD level_scale(symmetrize(v_alpha.matrix() + factor * level.transpose() * level));
  SymmetricPD slope_scale(symmetrize(v_alpha.matrix() + factor * slope.transpose() * slope));
  SymmetricPD sigma_mu = sample_inverse_wishart(df, level_scale, rng);
  SymmetricPD sigma_delta = sample_inverse_wishart(df, slope_scale, rng);
  return {std::move(sigma_mu), std::move(sigma_delta)};
}

}  // namespace mqbsts
