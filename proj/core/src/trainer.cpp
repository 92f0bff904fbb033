#include "mqbsts/trainer.hpp"

#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "mqbsts/distributions.hpp"
#include "mqbsts/errors.hpp"

namespace mqbsts {

namespace {

constexpr double kDefaultPhiInit = 0.1;
constexpr double kDefaultPhiStep = 0.05;
constexpr int kAdaptWindow = 25;
constexpr double kAcceptLow = 0.30;
constexpr double kAcceptHigh = 0.45;
constexpr double kStepShrink = 0.8;
constexpr double kStepGrow = 1.25;

template <typename F>
auto run_kernel(int iteration, const char* kernel, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError("iteration " + std::to_string(iteration) + ", " + kernel + ": " + e.what());
  }
}

void require_finite(int iteration, const char* what, bool finite) {
  if (!finite) {
    throw NumericalError("iteration " + std::to_string(iteration) + ": non-finite " + what);
  }
}

class Chain {
 public:
  Chain(const Dataset& dataset, const QuantileSpec& tau, const McmcConfig& config, Rng rng)
      : data_(dataset),
        tau_(tau),
        config_(config),
        rng_(rng),
        n_(dataset.n()),
        m_(dataset.m()),
        x_(assemble_block_X(dataset)),
        prior_(RegressionPrior::from_design(x_, dataset.n(), config.kappa, config.b_gamma, config.pi)),
        hyper_(config.trend_hyper(dataset.m())),
        v0_scale_(prior_sigma_tau_scale(dataset.y, config.v0, config.r_squared)),
        v_alpha_(SymmetricPD(config.v_alpha * Matrix::Identity(dataset.m(), dataset.m()))),
        gamma_(Eigen::VectorXi::Zero(x_.cols())),
        beta_(Vector::Zero(x_.cols())),
        sigma_tau_(sample_inverse_wishart(config.v0, v0_scale_, rng_)),
        phi_(config.resolved_phi_init(dataset.m())),
        step_(config.resolved_phi_step(dataset.m())),
        sigma_mu_(v_alpha_),
        sigma_delta_(v_alpha_) {}

  PosteriorSample run() {
    PosteriorSample sample;
    sample.config = config_;
    sample.tau = tau_;
    sample.hyper = hyper_;
    sample.fingerprint = DataFingerprint::of(data_);
    sample.labels = data_.coefficient_labels();
    sample.draws.reserve(static_cast<std::size_t>(config_.iterations - config_.burn_in));

    Eigen::VectorXi window_accepts = Eigen::VectorXi::Zero(m_);
    Eigen::VectorXi kept_accepts = Eigen::VectorXi::Zero(m_);
    int window_count = 0;

    for (int it = 0; it < config_.iterations; ++it) {
      const Eigen::VectorXi accepted = step(it);
      if (it < config_.burn_in) {
        window_accepts += accepted;
        if (++window_count == kAdaptWindow) {
          adapt(window_accepts, window_count);
          window_accepts.setZero();
          window_count = 0;
        }
        continue;
      }
      kept_accepts += accepted;
      sample.draws.push_back(snapshot(it));
    }
    const double kept = static_cast<double>(config_.iterations - config_.burn_in);
    sample.phi_acceptance = kept_accepts.cast<double>() / kept;
    sample.phi_step = step_;
    return sample;
  }

 private:
  Eigen::VectorXi step(int it) {
    Matrix z = data_.y;
    if (hyper_.enabled) {
      const Matrix xi = regression_fit(data_, beta_);
      const ErrorMoments moments = error_moments(phi_, tau_, sigma_tau_.matrix());
      paths_ = run_kernel(it, "trend states", [&] {
        return draw_trend_states(data_.y, xi, moments, w_, hyper_, sigma_mu_, sigma_delta_, rng_);
      });
      const TrendCovariances covs = run_kernel(it, "trend covariances", [&] {
        return draw_trend_covariances(*paths_, hyper_, w_, config_.nu_alpha, v_alpha_, config_.scale_trend_by_w,
                                      rng_);
      });
      sigma_mu_ = covs.sigma_mu;
      sigma_delta_ = covs.sigma_delta;
      require_finite(it, "trend path", paths_->mu.allFinite() && paths_->delta.allFinite());
      z -= paths_->mu;
    }
    const Vector z_tilde = vectorize_by_series(z);

    const DecorrelatedSystem sys = decorrelate(z_tilde, x_, phi_, sigma_tau_, tau_);
    const ConditionalStats stats = ConditionalStats::from(sys);
    gamma_ = run_kernel(it, "ssvs", [&] { return draw_gamma_ssvs(stats, gamma_, w_, prior_, rng_); });
    beta_ = run_kernel(it, "beta", [&] { return draw_beta(stats, gamma_, w_, prior_, rng_); });
    require_finite(it, "beta", beta_.allFinite());

    const Matrix residual = z - regression_fit(data_, beta_);
    sigma_tau_ = run_kernel(it, "sigma_tau", [&] {
      return draw_sigma_tau(residual, phi_, tau_, w_, config_.v0, v0_scale_, rng_);
    });
    const PhiUpdate phi = run_kernel(it, "phi", [&] {
      return draw_phi_mh(phi_, residual, sigma_tau_, tau_, w_, step_, rng_);
    });
    phi_ = phi.phi_diag;
    require_finite(it, "phi", phi_.allFinite());

    const DecorrelatedSystem sys_w = decorrelate(z_tilde, x_, phi_, sigma_tau_, tau_);
    w_ = run_kernel(it, "w", [&] { return draw_w(sys_w, beta_, config_.w_exponent, rng_); });
    require_finite(it, "W", std::isfinite(w_) && w_ > 0.0);
    return phi.accepted;
  }

  void adapt(const Eigen::VectorXi& accepts, int count) {
    if (!config_.adapt_phi_step) return;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double rate = static_cast<double>(accepts[i]) / count;
      if (rate < kAcceptLow) {
        step_[i] *= kStepShrink;
      } else if (rate > kAcceptHigh) {
        step_[i] *= kStepGrow;
      }
    }
  }

  McmcDraw snapshot(int it) const {
    McmcDraw draw{it, std::nullopt, std::nullopt, gamma_, beta_, sigma_tau_, phi_, w_};
    if (hyper_.enabled) {
      draw.trend = paths_;
      draw.trend_cov = TrendCovariances{sigma_mu_, sigma_delta_};
    }
    return draw;
  }

  const Dataset& data_;
  const QuantileSpec& tau_;
  const McmcConfig& config_;
  Rng rng_;
  Eigen::Index n_;
  Eigen::Index m_;
  Matrix x_;
  RegressionPrior prior_;
  TrendHyper hyper_;
  SymmetricPD v0_scale_;
  SymmetricPD v_alpha_;
  Eigen::VectorXi gamma_;
  Vector beta_;
  SymmetricPD sigma_tau_;
  Vector phi_;
  Vector step_;
  double w_ = 1.0;
  SymmetricPD sigma_mu_;
  SymmetricPD sigma_delta_;
  std::optional<TrendPaths> paths_;
};

}  // namespace

void McmcConfig::validate(Eigen::Index m) const {
  if (iterations <= 0) throw ArgumentError("mcmc: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw ArgumentError("mcmc: burn_in must lie in [0, iterations)");
  if (!(threshold_inclusion >= 0.0 && threshold_inclusion <= 1.0)) {
    throw ArgumentError("mcmc: threshold must lie in [0, 1]");
  }
  if (!(pi >= 0.0 && pi <= 1.0)) throw ArgumentError("mcmc: pi must lie in [0, 1]");
  if (!(kappa > 0.0)) throw ArgumentError("mcmc: kappa must be positive");
  if (!(r_squared >= 0.0 && r_squared < 1.0)) throw ArgumentError("mcmc: R^2 must lie in [0, 1)");
  if (!(v0 > static_cast<double>(m) + 1.0)) {
    throw ArgumentError("mcmc: v0 must exceed m + 1 so that the prior scale is positive definite");
  }
  if (!(nu_alpha > 0.0) || !(v_alpha > 0.0)) throw ArgumentError("mcmc: nu_alpha and V_alpha must be positive");
  const Vector init = resolved_phi_init(m);
  if ((init.array() <= 0.0).any() || !init.allFinite()) throw ArgumentError("mcmc: phi_init must be positive");
  const Vector steps = resolved_phi_step(m);
  if ((steps.array() < 0.0).any() || !steps.allFinite()) {
    throw ArgumentError("mcmc: phi step sizes must be nonnegative");
  }
  trend_hyper(m).validate(m);
}

TrendHyper McmcConfig::trend_hyper(Eigen::Index m) const {
  TrendHyper hyper = trend ? TrendHyper::local_linear(m) : TrendHyper::disabled(m);
  if (trend_d.size() > 0) hyper.D = trend_d;
  if (trend_lambda.size() > 0) hyper.lambda = trend_lambda;
  return hyper;
}

Vector McmcConfig::resolved_phi_init(Eigen::Index m) const {
  if (phi_init.size() == 0) return Vector::Constant(m, kDefaultPhiInit);
  if (phi_init.size() != m) throw ArgumentError("mcmc: phi_init needs one entry per series");
  return phi_init;
}

Vector McmcConfig::resolved_phi_step(Eigen::Index m) const {
  if (phi_step.size() == 0) return Vector::Constant(m, kDefaultPhiStep);
  if (phi_step.size() != m) throw ArgumentError("mcmc: phi_step needs one entry per series");
  return phi_step;
}

DataFingerprint DataFingerprint::of(const Dataset& dataset) {
  return {dataset.n(), dataset.m(), dataset.total_predictors(), dataset.fingerprint()};
}

Matrix prior_sigma_tau_scale(const Matrix& y, double v0, double r_squared) {
  const Eigen::Index n = y.rows();
  const Eigen::Index m = y.cols();
  if (n < 2) throw ArgumentError("prior: at least two observations are needed for the sample covariance");
  const Matrix centered = y.rowwise() - y.colwise().mean();
  const Matrix sigma_y = centered.transpose() * centered / static_cast<double>(n - 1);
  return symmetrize((v0 - static_cast<double>(m) - 1.0) * (1.0 - r_squared) * sigma_y);
}

PosteriorSample train(const Dataset& dataset, const QuantileSpec& tau, const McmcConfig& config) {
  dataset.validate();
  if (tau.size() != dataset.m()) throw ArgumentError("train: tau needs one entry per series");
  config.validate(dataset.m());
  Chain chain(dataset, tau, config, Rng(config.seed));
  return chain.run();
}

std::vector<PosteriorSample> train_chains(const Dataset& dataset, const QuantileSpec& tau,
                                          const McmcConfig& config, int chains) {
  if (chains <= 0) throw ArgumentError("train: chain count must be positive");
  dataset.validate();
  if (tau.size() != dataset.m()) throw ArgumentError("train: tau needs one entry per series");
  config.validate(dataset.m());

  std::vector<std::optional<PosteriorSample>> results(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  std::vector<std::thread> workers;
  const Rng root(config.seed);
  for (int c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        Chain chain(dataset, tau, config, root.split(static_cast<std::uint64_t>(c)));
        results[static_cast<std::size_t>(c)] = chain.run();
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<PosteriorSample> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

Eigen::VectorXi InclusionTable::selected(double threshold) const {
  return (probability.array() >= threshold).cast<int>();
}

InclusionTable inclusion_probabilities(const PosteriorSample& sample) {
  if (sample.draws.empty()) throw ArgumentError("inclusion: empty posterior sample");
  const Eigen::Index k = sample.draws.front().gamma.size();
  Vector counts = Vector::Zero(k);
  for (const McmcDraw& d : sample.draws) counts += d.gamma.cast<double>();
  InclusionTable table;
  table.labels = sample.labels;
  table.probability = counts / static_cast<double>(sample.draws.size());
  return table;
}

std::vector<CoefficientSummary> posterior_coefficient_summary(const PosteriorSample& sample,
                                                              const std::optional<Vector>& truth) {
  if (sample.draws.empty()) throw ArgumentError("summary: empty posterior sample");
  const Eigen::Index k = sample.draws.front().beta.size();
  if (truth && truth->size() != k) throw ArgumentError("summary: truth length does not match the coefficients");
  const double count = static_cast<double>(sample.draws.size());
  Vector mean = Vector::Zero(k);
  for (const McmcDraw& d : sample.draws) mean += d.beta;
  mean /= count;
  Vector ss = Vector::Zero(k);
  for (const McmcDraw& d : sample.draws) ss += (d.beta - mean).cwiseAbs2();

  std::vector<CoefficientSummary> out(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    auto& s = out[static_cast<std::size_t>(j)];
    s.label = j < static_cast<Eigen::Index>(sample.labels.size()) ? sample.labels[static_cast<std::size_t>(j)]
                                                                   : std::to_string(j);
    s.mean = mean[j];
    s.sd = sample.draws.size() > 1 ? std::sqrt(ss[j] / (count - 1.0)) : 0.0;
    if (truth && (*truth)[j] != 0.0) s.normalized_error = std::abs((mean[j] - (*truth)[j]) / (*truth)[j]);
  }
  return out;
}

}  // namespace mqbsts
