#include "mqbsts/distributions.hpp"

#include <cmath>
#include <numbers>

#include "mqbsts/errors.hpp"

namespace mqbsts {

Vector sample_mvn(const Vector& mean, const SymmetricPD& cov, Rng& rng) {
  if (mean.size() != cov.dim()) {
    throw ArgumentError("sample_mvn: mean and covariance dimensions differ");
  }
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z[i] = rng.normal();
  }
  return mean + cov.lower().triangularView<Eigen::Lower>() * z;
}

SymmetricPD sample_inverse_wishart(double df, const SymmetricPD& scale, Rng& rng) {
  const Eigen::Index m = scale.dim();
  if (!(df > static_cast<double>(m) - 1.0)) {
    throw ArgumentError("sample_inverse_wishart: degrees of freedom must exceed dim - 1");
  }
  // Bartlett factor of a Wishart(df, I) draw: lower-triangular with
  // chi(df - i) on the diagonal (0-based i) and N(0,1) below.
  Matrix bartlett = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_square(df - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) {
      bartlett(i, j) = rng.normal();
    }
  }
  // With scale = C C^T, C^{-T} B B^T C^{-1} ~ Wishart(df, scale^{-1}); its inverse
  // is (C B^{-T}) (C B^{-T})^T.
  const Matrix b_inv = bartlett.triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
  const Matrix factor = scale.lower() * b_inv.transpose();
  return SymmetricPD(symmetrize(factor * factor.transpose()));
}

namespace {

// Standardized GIG with density proportional to x^{lambda-1} exp(-omega (x + 1/x) / 2),
// lambda >= 0. Three regimes after Hormann and Leydold (2014).

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  }
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift; 0 <= lambda <= 1, moderate omega.
double gig_rou_noshift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) {
      return x;
    }
  }
}

// Ratio-of-uniforms with the mode shifted to the origin; lambda > 1 or omega large.
double gig_rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Bounding rectangle from the roots of a depressed cubic.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x <= 0.0) {
      continue;
    }
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) {
      return x;
    }
  }
}

// Piecewise hat for the non-log-concave corner 0 <= lambda < 1, small omega.
double gig_piecewise_hat(double lambda, double omega, Rng& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);

  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  area[0] = k0 * x0;

  double k1 = 0.0;
  double k2 = 0.0;
  if (x0 >= 2.0 / omega) {
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                              : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  for (;;) {
    double v = total * rng.uniform();
    double x = 0.0;
    double hx = 0.0;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double lo = (x0 > 2.0 / omega) ? x0 : 2.0 / omega;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) {
      return x;
    }
  }
}

}  // namespace

double sample_gig(double a, double b, double p, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(p)) {
    throw ArgumentError("sample_gig: requires finite a > 0, b > 0 and finite p");
  }
  // x = sqrt(b/a) * y where y is standardized GIG(p, omega = sqrt(ab));
  // negative p uses y(p) = 1 / y(-p).
  const double omega = std::sqrt(a * b);
  const double alpha = std::sqrt(b / a);
  const double lambda = std::abs(p);

  double y = 0.0;
  if (lambda > 2.0 || omega > 3.0) {
    y = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = gig_rou_noshift(lambda, omega, rng);
  } else {
    y = gig_piecewise_hat(lambda, omega, rng);
  }
  return (p < 0.0) ? alpha / y : alpha * y;
}

double sample_exponential_unit(Rng& rng) { return -std::log(rng.uniform()); }

Vector sample_mal(const Vector& phi, const SymmetricPD& sigma, Rng& rng) {
  if (phi.size() != sigma.dim()) {
    throw ArgumentError("sample_mal: phi and sigma dimensions differ");
  }
  const double w = sample_exponential_unit(rng);
  const Vector e = sample_mvn(Vector::Zero(phi.size()), sigma, rng);
  return phi * w + std::sqrt(w) * e;
}

}  // namespace mqbsts
