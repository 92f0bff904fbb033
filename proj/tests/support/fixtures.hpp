#pragma once

// Random conditional problems and dense reference computations for the sampler kernels.

#include <random>
#include <string>
#include <vector>

#include "mqbsts/model.hpp"
#include "mqbsts/qr_sampler.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace mqbsts;

struct Problem {
  Dataset layout;
  Matrix x;
  Matrix z;
  Vector phi;
  Matrix sigma_tau;
  QuantileSpec tau{0.5};
  double w = 1.0;
};

inline Problem make_problem(Eigen::Index n, std::vector<Eigen::Index> pools, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const auto m = static_cast<Eigen::Index>(pools.size());
  Problem p;
  p.layout.y = Matrix::Zero(n, m);
  Vector t(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix x(n, pools[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < x.size(); ++j) x.data()[j] = normal(gen);
    p.layout.predictors.push_back(x);
    p.layout.series_names.push_back("s" + std::to_string(i));
    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < x.cols(); ++k) names.push_back("x" + std::to_string(k));
    p.layout.predictor_names.push_back(names);
    t[i] = unif(gen);
  }
  p.tau = QuantileSpec(t);
  p.x = assemble_block_X(p.layout);
  p.phi = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i) p.phi[i] = 0.5 + unif(gen);
  p.sigma_tau = oracle::random_spd(m, gen);
  p.w = 0.5 + unif(gen);
  p.z = Matrix(n, m);
  for (Eigen::Index i = 0; i < p.z.size(); ++i) p.z.data()[i] = 2.0 * normal(gen);
  return p;
}

// Dense ((U Phi)^{-1})^T (x) I_n from an independent Cholesky factorization.
inline Matrix dense_mixing(const Vector& phi, const Matrix& sigma_tau, Eigen::Index n) {
  const Matrix u = Eigen::LLT<Matrix>(sigma_tau).matrixU();
  const Matrix m_small = (u * phi.asDiagonal()).inverse().transpose();
  return oracle::kron(m_small, Matrix::Identity(n, n));
}

inline Vector phi_eps_stacked(const Vector& phi, const QuantileSpec& tau, Eigen::Index n) {
  const Eigen::Index m = phi.size();
  Vector out(n * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double psi = (1.0 - 2.0 * tau[i]) / (tau[i] * (1.0 - tau[i]));
    out.segment(i * n, n).setConstant(phi[i] * psi);
  }
  return out;
}

inline Eigen::VectorXi mask_from_bits(unsigned bits, Eigen::Index k) {
  Eigen::VectorXi g(k);
  for (Eigen::Index i = 0; i < k; ++i) g[i] = (bits >> i) & 1U;
  return g;
}

// log p(gamma | .) up to a constant from the collapsed Gaussian marginal
// Z_hat - W Phi_hat ~ N(X_gamma b_gamma, W I + X_gamma A_gamma^{-1} X_gamma^T).
inline double enumerated_log_mass(const Matrix& x_hat, const Vector& y, double w, const RegressionPrior& prior,
                           const Eigen::VectorXi& gamma) {
  double log_prior = 0.0;
  for (Eigen::Index k = 0; k < gamma.size(); ++k) log_prior += std::log(gamma[k] ? prior.pi[k] : 1.0 - prior.pi[k]);
  const Eigen::Index big_n = y.size();
  Matrix cov = w * Matrix::Identity(big_n, big_n);
  Vector mean = Vector::Zero(big_n);
  const Matrix x_g = restrict_columns(x_hat, gamma);
  if (x_g.cols() > 0) {
    const Matrix a_g = restrict_square(prior.a, gamma);
    cov += x_g * a_g.inverse() * x_g.transpose();
    mean = x_g * restrict_vector(prior.b, gamma);
  }
  return oracle::gaussian_log_density(y, mean, cov) + log_prior;
}

}  // namespace fixtures
