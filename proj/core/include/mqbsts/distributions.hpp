#pragma once

#include "mqbsts/linalg.hpp"
#include "mqbsts/rng.hpp"

namespace mqbsts {

// N(mean, cov).
Vector sample_mvn(const Vector& mean, const SymmetricPD& cov, Rng& rng);

// Inverse Wishart IW_m(df, scale): density proportional to
// |S|^{-(df+m+1)/2} exp(-tr(scale S^{-1}) / 2), mean scale / (df - m - 1).
// Bartlett decomposition of the Wishart(df, scale^{-1}) precision, then inverted
// through triangular factors. Requires df > m - 1.
SymmetricPD sample_inverse_wishart(double df, const SymmetricPD& scale, Rng& rng);

// Generalized inverse Gaussian with density proportional to
// x^{p-1} exp(-(a x + b / x) / 2), a > 0, b > 0.
double sample_gig(double a, double b, double p, Rng& rng);

// Exp(1).
double sample_exponential_unit(Rng& rng);

// Multivariate asymmetric Laplace via its normal mean-variance mixture:
// phi * w + sqrt(w) * e with w ~ Exp(1), e ~ N(0, sigma).
Vector sample_mal(const Vector& phi, const SymmetricPD& sigma, Rng& rng);

}  // namespace mqbsts
