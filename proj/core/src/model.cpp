#include "mqbsts/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "mqbsts/errors.hpp"

namespace mqbsts {

QuantileSpec::QuantileSpec(Vector tau) : tau_(std::move(tau)) {
  if (tau_.size() == 0) {
    throw ArgumentError("QuantileSpec: empty quantile vector");
  }
  for (Eigen::Index i = 0; i < tau_.size(); ++i) {
    if (!(tau_[i] > 0.0 && tau_[i] < 1.0)) {
      throw ArgumentError("QuantileSpec: every tau must lie in (0, 1)");
    }
  }
}

QuantileSpec::QuantileSpec(std::initializer_list<double> tau)
    : QuantileSpec(Vector::Map(tau.begin(), static_cast<Eigen::Index>(tau.size()))) {}

Vector QuantileSpec::skew() const {
  return ((1.0 - 2.0 * tau_.array()) / (tau_.array() * (1.0 - tau_.array()))).matrix();
}

Vector QuantileSpec::scale() const {
  return (2.0 / (tau_.array() * (1.0 - tau_.array()))).sqrt().matrix();
}

Eigen::Index Dataset::total_predictors() const {
  Eigen::Index total = 0;
  for (const auto& x : predictors) total += x.cols();
  return total;
}

Eigen::Index Dataset::offset(Eigen::Index series) const {
  Eigen::Index off = 0;
  for (Eigen::Index i = 0; i < series; ++i) off += k(i);
  return off;
}

void Dataset::validate() const {
  const auto m_count = static_cast<std::size_t>(m());
  if (m() == 0 || n() == 0) {
    throw DataError("dataset: no targets or no rows");
  }
  if (predictors.size() != m_count) {
    throw DataError("dataset: expected one predictor pool per target series");
  }
  if (series_names.size() != m_count || predictor_names.size() != m_count) {
    throw DataError("dataset: name lists do not match the number of series");
  }
  if (!y.allFinite()) {
    throw DataError("dataset: target matrix contains missing or non-finite values");
  }
  for (std::size_t i = 0; i < m_count; ++i) {
    if (predictors[i].rows() != n()) {
      throw DataError("dataset: predictor pool for series '" + series_names[i] +
                      "' has a different row count from the targets");
    }
    if (static_cast<Eigen::Index>(predictor_names[i].size()) != predictors[i].cols()) {
      throw DataError("dataset: predictor names for series '" + series_names[i] + "' do not match its pool");
    }
    if (!predictors[i].allFinite()) {
      throw DataError("dataset: predictors for series '" + series_names[i] +
                      "' contain missing or non-finite values");
    }
  }
}

Dataset Dataset::head(Eigen::Index rows) const {
  if (rows < 0 || rows > n()) {
    throw ArgumentError("dataset: head length out of range");
  }
  Dataset out{y.topRows(rows), {}, series_names, predictor_names};
  for (const auto& x : predictors) out.predictors.push_back(x.topRows(rows));
  return out;
}

std::vector<std::string> Dataset::coefficient_labels() const {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < predictor_names.size(); ++i) {
    for (const auto& p : predictor_names[i]) labels.push_back(series_names[i] + "." + p);
  }
  return labels;
}

namespace {

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void text(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void matrix(const Matrix& mat) {
    u64(static_cast<std::uint64_t>(mat.rows()));
    u64(static_cast<std::uint64_t>(mat.cols()));
    for (Eigen::Index j = 0; j < mat.cols(); ++j)
      for (Eigen::Index i = 0; i < mat.rows(); ++i) u64(std::bit_cast<std::uint64_t>(mat(i, j)));
  }
};

}  // namespace

std::uint64_t Dataset::fingerprint() const {
  Fnv1a h;
  h.matrix(y);
  for (const auto& x : predictors) h.matrix(x);
  for (const auto& s : series_names) h.text(s);
  for (const auto& pool : predictor_names)
    for (const auto& p : pool) h.text(p);
  return h.state;
}

LinkParams build_link(const Vector& phi_diag, const QuantileSpec& tau, const Matrix& sigma_corr) {
  const Eigen::Index m = tau.size();
  if (phi_diag.size() != m || sigma_corr.rows() != m || sigma_corr.cols() != m) {
    throw ArgumentError("build_link: dimension mismatch between Phi, tau and Sigma_corr");
  }
  if ((phi_diag.array() <= 0.0).any()) {
    throw ArgumentError("build_link: Phi diagonal must be strictly positive");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(sigma_corr(i, i) - 1.0) > 1e-12) {
      throw ArgumentError("build_link: Sigma_corr must have a unit diagonal");
    }
  }
  SymmetricPD checked(sigma_corr);  // rejects asymmetric or non-PD correlation

  LinkParams link;
  link.phi_diag = phi_diag;
  link.phi_tilde = tau.skew();
  link.psi_diag = tau.scale();
  link.sigma_corr = checked.matrix();
  link.phi_eps = phi_diag.cwiseProduct(link.phi_tilde);
  link.sigma_tau = link.psi_diag.asDiagonal() * link.sigma_corr * link.psi_diag.asDiagonal();
  link.sigma_eps = phi_diag.asDiagonal() * link.sigma_tau * phi_diag.asDiagonal();
  return link;
}

ErrorMoments error_moments(const Vector& phi_diag, const QuantileSpec& tau, const Matrix& sigma_tau) {
  if (phi_diag.size() != tau.size() || sigma_tau.rows() != tau.size()) {
    throw ArgumentError("error_moments: dimension mismatch");
  }
  return {phi_diag.cwiseProduct(tau.skew()),
          symmetrize(phi_diag.asDiagonal() * sigma_tau * phi_diag.asDiagonal())};
}

double quantile_loss(double u, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ArgumentError("quantile_loss: p must lie in (0, 1)");
  }
  return 0.5 * (std::abs(u) + (2.0 * p - 1.0) * u);
}

Matrix assemble_block_X(const Dataset& dataset) {
  const Eigen::Index n = dataset.n();
  const Eigen::Index m = dataset.m();
  Matrix x = Matrix::Zero(n * m, dataset.total_predictors());
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Matrix& block = dataset.predictors[static_cast<std::size_t>(i)];
    x.block(i * n, col, n, block.cols()) = block;
    col += block.cols();
  }
  return x;
}

Vector vectorize_by_series(const Matrix& z) {
  return Eigen::Map<const Vector>(z.data(), z.size());  // Eigen storage is column-major
}

Matrix devectorize_by_series(const Vector& v, Eigen::Index n, Eigen::Index m) {
  if (v.size() != n * m) {
    throw ArgumentError("devectorize: length is not n * m");
  }
  return Eigen::Map<const Matrix>(v.data(), n, m);
}

Matrix regression_fit(const Dataset& dataset, const Vector& beta) {
  if (beta.size() != dataset.total_predictors()) {
    throw ArgumentError("regression_fit: coefficient length does not match the predictor pools");
  }
  Matrix xi(dataset.n(), dataset.m());
  Eigen::Index off = 0;
  for (Eigen::Index i = 0; i < dataset.m(); ++i) {
    const Matrix& block = dataset.predictors[static_cast<std::size_t>(i)];
    xi.col(i) = block * beta.segment(off, block.cols());
    off += block.cols();
  }
  return xi;
}

}  // namespace mqbsts
