#include "mqbsts/qr_sampler.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mqbsts/distributions.hpp"
#include "mqbsts/errors.hpp"

namespace mqbsts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPerfectFitTolerance = 1e-20;

// (M (x) I_n) applied to an mn-row matrix, block row by block row.
Matrix apply_block_mixing(const Matrix& mixing, const Matrix& stacked, Eigen::Index n) {
  const Eigen::Index m = mixing.rows();
  Matrix out = Matrix::Zero(stacked.rows(), stacked.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {  // mixing is lower triangular
      if (mixing(i, j) != 0.0) {
        out.middleRows(i * n, n) += mixing(i, j) * stacked.middleRows(j * n, n);
      }
    }
  }
  return out;
}

Vector cholesky_solve(const Matrix& lower, const Vector& rhs) {
  return lower.transpose().triangularView<Eigen::Upper>().solve(
      lower.triangularView<Eigen::Lower>().solve(rhs));
}

}  // namespace

void ErrorState::validate() const {
  if ((phi_diag.array() <= 0.0).any() || !phi_diag.allFinite()) {
    throw NumericalError("error state: Phi diagonal must be strictly positive");
  }
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw NumericalError("error state: W must be positive");
  }
  SymmetricPD check(sigma_tau);
  (void)check;
}

Matrix decorrelation_matrix(const Vector& phi_diag, const SymmetricPD& sigma_tau) {
  const Eigen::Index m = sigma_tau.dim();
  if (phi_diag.size() != m) {
    throw ArgumentError("decorrelate: Phi and Sigma_tau dimensions differ");
  }
  // ((U Phi)^{-1})^T = U^{-T} Phi^{-1} = L^{-1} Phi^{-1} with Sigma_tau = L L^T.
  const Matrix l_inv = sigma_tau.lower().triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
  return l_inv * phi_diag.cwiseInverse().asDiagonal();
}

DecorrelatedSystem decorrelate(const Vector& z_tilde, const Matrix& x, const Vector& phi_diag,
                               const SymmetricPD& sigma_tau, const QuantileSpec& tau) {
  const Eigen::Index m = sigma_tau.dim();
  if (tau.size() != m || z_tilde.size() % m != 0 || x.rows() != z_tilde.size()) {
    throw ArgumentError("decorrelate: dimension mismatch");
  }
  const Eigen::Index n = z_tilde.size() / m;
  const Matrix mixing = decorrelation_matrix(phi_diag, sigma_tau);

  const Vector phi_eps = phi_diag.cwiseProduct(tau.skew());
  Vector phi_tilde(n * m);
  for (Eigen::Index i = 0; i < m; ++i) phi_tilde.segment(i * n, n).setConstant(phi_eps[i]);

  DecorrelatedSystem sys;
  sys.n = n;
  sys.m = m;
  sys.z_hat = apply_block_mixing(mixing, z_tilde, n);
  sys.x_hat = apply_block_mixing(mixing, x, n);
  sys.phi_eps_hat = apply_block_mixing(mixing, phi_tilde, n);
  return sys;
}

RegressionPrior RegressionPrior::from_design(const Matrix& x, Eigen::Index n, double kappa, double b0,
                                             double pi0) {
  if (!(kappa > 0.0) || n <= 0) {
    throw ArgumentError("regression prior: kappa and n must be positive");
  }
  if (!(pi0 >= 0.0 && pi0 <= 1.0)) {
    throw ArgumentError("regression prior: inclusion probability must lie in [0, 1]");
  }
  const Eigen::Index k = x.cols();
  RegressionPrior prior;
  prior.b = Vector::Constant(k, b0);
  prior.a = symmetrize(kappa * x.transpose() * x / static_cast<double>(n));
  prior.pi = Vector::Constant(k, pi0);
  return prior;
}

void RegressionPrior::validate(Eigen::Index k) const {
  if (b.size() != k || a.rows() != k || a.cols() != k || pi.size() != k) {
    throw ArgumentError("regression prior: dimensions do not match the number of predictors");
  }
  if ((pi.array() < 0.0).any() || (pi.array() > 1.0).any()) {
    throw ArgumentError("regression prior: inclusion probabilities must lie in [0, 1]");
  }
}

ConditionalStats ConditionalStats::from(const DecorrelatedSystem& sys) {
  ConditionalStats stats;
  stats.gram = symmetrize(sys.x_hat.transpose() * sys.x_hat);
  stats.x_z = sys.x_hat.transpose() * sys.z_hat;
  stats.x_phi = sys.x_hat.transpose() * sys.phi_eps_hat;
  return stats;
}

BetaPosterior beta_posterior(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                             const RegressionPrior& prior) {
  const Matrix a_g = restrict_square(prior.a, gamma);
  BetaPosterior post;
  post.precision = symmetrize(restrict_square(stats.gram, gamma) / w + a_g);
  post.shift = restrict_vector(stats.x_z, gamma) / w - restrict_vector(stats.x_phi, gamma) +
               a_g * restrict_vector(prior.b, gamma);
  if (post.precision.rows() == 0) {
    post.mean = Vector(0);
    return post;
  }
  Matrix lower;
  try {
    lower = cholesky_lower(post.precision);
  } catch (const DecompositionError& e) {
    throw NumericalError(std::string("draw_beta: posterior precision is singular: ") + e.what());
  }
  post.mean = cholesky_solve(lower, post.shift);
  return post;
}

Vector draw_beta(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                 const RegressionPrior& prior, Rng& rng) {
  if (gamma.size() != stats.gram.rows()) {
    throw ArgumentError("draw_beta: indicator length does not match the number of predictors");
  }
  const BetaPosterior post = beta_posterior(stats, gamma, w, prior);
  if (post.mean.size() == 0) {
    return Vector::Zero(gamma.size());
  }
  const Matrix lower = cholesky_lower(post.precision);
  Vector z(post.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Vector active = post.mean + lower.transpose().triangularView<Eigen::Upper>().solve(z);
  return expand_vector(active, gamma);
}

Vector draw_beta(const DecorrelatedSystem& sys, const Eigen::VectorXi& gamma, double w,
                 const RegressionPrior& prior, Rng& rng) {
  return draw_beta(ConditionalStats::from(sys), gamma, w, prior, rng);
}

double log_gamma_mass(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                      const RegressionPrior& prior) {
  double log_prior = 0.0;
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    log_prior += (gamma[k] != 0) ? std::log(prior.pi[k]) : std::log1p(-prior.pi[k]);
  }
  if ((gamma.array() != 0).count() == 0) {
    return log_prior;
  }
  const Matrix a_g = restrict_square(prior.a, gamma);
  const Vector b_g = restrict_vector(prior.b, gamma);
  Matrix a_lower;
  Matrix p_lower;
  try {
    a_lower = cholesky_lower(a_g);
  } catch (const DecompositionError&) {
    return kNegInf;
  }
  const Matrix precision = symmetrize(restrict_square(stats.gram, gamma) / w + a_g);
  try {
    p_lower = cholesky_lower(precision);
  } catch (const DecompositionError&) {
    return kNegInf;
  }
  const Vector shift = restrict_vector(stats.x_z, gamma) / w - restrict_vector(stats.x_phi, gamma) + a_g * b_g;
  const Vector whitened = p_lower.triangularView<Eigen::Lower>().solve(shift);
  const double quad = b_g.dot(a_g * b_g) - whitened.squaredNorm();
  return -0.5 * quad + 0.5 * log_det_from_cholesky(a_lower) - 0.5 * log_det_from_cholesky(p_lower) + log_prior;
}

Eigen::VectorXi draw_gamma_ssvs(const ConditionalStats& stats, const Eigen::VectorXi& gamma, double w,
                                const RegressionPrior& prior, Rng& rng) {
  const Eigen::Index k_total = gamma.size();
  prior.validate(k_total);
  if (stats.gram.rows() != k_total) {
    throw ArgumentError("ssvs: indicator length does not match the number of predictors");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k_total));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }

  Eigen::VectorXi current = gamma;
  for (Eigen::Index k = 0; k < k_total; ++k) {
    if (prior.pi[k] == 0.0) current[k] = 0;
    if (prior.pi[k] == 1.0) current[k] = 1;
  }
  for (const Eigen::Index k : order) {
    if (prior.pi[k] == 0.0 || prior.pi[k] == 1.0) {
      continue;
    }
    current[k] = 1;
    const double log_in = log_gamma_mass(stats, current, w, prior);
    current[k] = 0;
    const double log_out = log_gamma_mass(stats, current, w, prior);
    if (log_in == kNegInf && log_out == kNegInf) {
      throw NumericalError("ssvs: both inclusion states have zero mass at coordinate " + std::to_string(k));
    }
    double p_in = 0.0;
    if (log_out == kNegInf) {
      p_in = 1.0;
    } else if (log_in != kNegInf) {
      p_in = 1.0 / (1.0 + std::exp(log_out - log_in));
    }
    current[k] = (rng.uniform() < p_in) ? 1 : 0;
  }
  return current;
}

Matrix sigma_tau_scale(const Matrix& regression_residual, const Vector& phi_diag, const QuantileSpec& tau,
                       double w, const Matrix& v0) {
  const Eigen::Index n = regression_residual.rows();
  const Eigen::Index m = regression_residual.cols();
  if (phi_diag.size() != m || tau.size() != m || v0.rows() != m) {
    throw ArgumentError("sigma_tau: dimension mismatch");
  }
  const Vector phi_eps = phi_diag.cwiseProduct(tau.skew());
  const Matrix r = (regression_residual - Vector::Ones(n) * (w * phi_eps).transpose()) *
                   phi_diag.cwiseInverse().asDiagonal();
  return symmetrize(r.transpose() * r / w + v0);
}

SymmetricPD draw_sigma_tau(const Matrix& regression_residual, const Vector& phi_diag, const QuantileSpec& tau,
                           double w, double v0, const SymmetricPD& v0_scale, Rng& rng) {
  const SymmetricPD scale(sigma_tau_scale(regression_residual, phi_diag, tau, w, v0_scale.matrix()));
  return sample_inverse_wishart(v0 + static_cast<double>(regression_residual.rows()), scale, rng);
}

double phi_log_density(const Vector& phi_diag, const Matrix& regression_residual, const SymmetricPD& sigma_tau,
                       const QuantileSpec& tau, double w) {
  const Eigen::Index n = regression_residual.rows();
  const Eigen::Index m = regression_residual.cols();
  if (phi_diag.size() != m || sigma_tau.dim() != m || tau.size() != m) {
    throw ArgumentError("phi density: dimension mismatch");
  }
  if ((phi_diag.array() <= 0.0).any()) {
    return kNegInf;
  }
  const Matrix r = regression_residual * phi_diag.cwiseInverse().asDiagonal() -
                   Vector::Ones(n) * (w * tau.skew()).transpose();
  // || R U^{-1} ||_F^2 = || L^{-1} R^T ||_F^2
  const Matrix whitened = sigma_tau.lower().triangularView<Eigen::Lower>().solve(r.transpose());
  return -static_cast<double>(n) * phi_diag.array().log().sum() - whitened.squaredNorm() / (2.0 * w);
}

PhiUpdate draw_phi_mh(const Vector& phi_diag, const Matrix& regression_residual, const SymmetricPD& sigma_tau,
                      const QuantileSpec& tau, double w, const Vector& step_sizes, Rng& rng) {
  const Eigen::Index m = phi_diag.size();
  if (step_sizes.size() != m) {
    throw ArgumentError("phi MH: one step size per series is required");
  }
  if ((phi_diag.array() <= 0.0).any()) {
    throw ArgumentError("phi MH: current Phi must be strictly positive");
  }
  PhiUpdate out{phi_diag, Eigen::VectorXi::Ones(m)};
  double current = phi_log_density(out.phi_diag, regression_residual, sigma_tau, tau, w);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (step_sizes[i] == 0.0) {
      continue;
    }
    Vector proposal = out.phi_diag;
    const double log_step = step_sizes[i] * rng.normal();
    proposal[i] = out.phi_diag[i] * std::exp(log_step);
    const double candidate = phi_log_density(proposal, regression_residual, sigma_tau, tau, w);
    // Flat prior on phi; the log-scale walk contributes the Jacobian phi'/phi.
    const double log_ratio = candidate - current + log_step;
    if (std::log(rng.uniform()) < log_ratio) {
      out.phi_diag = proposal;
      current = candidate;
    } else {
      out.accepted[i] = 0;
    }
  }
  return out;
}

GigParams w_posterior_params(const DecorrelatedSystem& sys, const Vector& beta, WExponent exponent) {
  if (beta.size() != sys.x_hat.cols()) {
    throw ArgumentError("draw_w: coefficient length does not match the design");
  }
  GigParams params;
  params.a = 2.0 + sys.phi_eps_hat.squaredNorm();
  params.b = (sys.z_hat - sys.x_hat * beta).squaredNorm();
  const double n = static_cast<double>(sys.n);
  const double m = static_cast<double>(sys.m);
  params.p = (exponent == WExponent::Joint) ? 1.0 - m * n / 2.0 : 1.0 - n / 2.0;
  return params;
}

double draw_w(const DecorrelatedSystem& sys, const Vector& beta, WExponent exponent, Rng& rng) {
  const GigParams params = w_posterior_params(sys, beta, exponent);
  if (!(params.b > kPerfectFitTolerance * sys.z_hat.squaredNorm()) || !(params.b > 0.0)) {
    throw NumericalError("draw_w: residual sum of squares is zero (degenerate perfect fit)");
  }
  return sample_gig(params.a, params.b, params.p, rng);
}

}  // namespace mqbsts
