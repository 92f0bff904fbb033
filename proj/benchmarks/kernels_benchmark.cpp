#include <benchmark/benchmark.h>

#include <map>

#include "mqbsts/distributions.hpp"
#include "mqbsts/qr_sampler.hpp"
#include "mqbsts/simdata.hpp"
#include "mqbsts/trainer.hpp"
#include "mqbsts/trend.hpp"

using namespace mqbsts;

namespace {

struct Fixture {
  sim::SimResult sim;
  Matrix x;
  Vector z;
  Vector phi;
  SymmetricPD sigma_tau;
  QuantileSpec tau{0.9, 0.9, 0.9};
  RegressionPrior prior;

  explicit Fixture(Eigen::Index n)
      : sim([&] {
          sim::SimConfig c;
          c.n = n;
          c.seed = 1;
          return sim::generate(c);
        }()),
        x(assemble_block_X(sim.dataset)),
        z(vectorize_by_series(sim.dataset.y - sim.truth.mu)),
        phi(sim::error_scale()),
        sigma_tau(sim.truth.link.sigma_tau),
        prior(RegressionPrior::from_design(x, n, 0.01, 0.0, 0.5)) {}
};

const Fixture& fixture(Eigen::Index n) {
  static std::map<Eigen::Index, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_Decorrelate(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(decorrelate(f.z, f.x, f.phi, f.sigma_tau, f.tau));
}
BENCHMARK(BM_Decorrelate)->Arg(100)->Arg(500)->Arg(2000);

void BM_SsvsSweep(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const auto stats = ConditionalStats::from(decorrelate(f.z, f.x, f.phi, f.sigma_tau, f.tau));
  Rng rng(2);
  Eigen::VectorXi gamma = Eigen::VectorXi::Ones(f.x.cols());
  for (auto _ : state) {
    gamma = draw_gamma_ssvs(stats, gamma, 1.0, f.prior, rng);
    benchmark::DoNotOptimize(gamma.data());
  }
}
BENCHMARK(BM_SsvsSweep)->Arg(500);

void BM_BetaDraw(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const auto stats = ConditionalStats::from(decorrelate(f.z, f.x, f.phi, f.sigma_tau, f.tau));
  const Eigen::VectorXi gamma = Eigen::VectorXi::Ones(f.x.cols());
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(draw_beta(stats, gamma, 1.0, f.prior, rng));
}
BENCHMARK(BM_BetaDraw)->Arg(500);

void BM_TrendSmoother(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const Matrix xi = regression_fit(f.sim.dataset, f.sim.truth.beta);
  const ErrorMoments errors = error_moments(f.phi, f.tau, f.sigma_tau.matrix());
  const SymmetricPD cov(0.01 * Matrix::Identity(3, 3));
  Rng rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        draw_trend_states(f.sim.dataset.y, xi, errors, 1.0, TrendHyper::local_linear(3), cov, cov, rng));
  }
}
BENCHMARK(BM_TrendSmoother)->Arg(100)->Arg(500)->Arg(2000);

void BM_Gig(benchmark::State& state) {
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_gig(12.0, 800.0, -749.0, rng));
}
BENCHMARK(BM_Gig);

void BM_TrainIteration(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  McmcConfig config;
  config.iterations = 20;
  config.burn_in = 10;
  for (auto _ : state) benchmark::DoNotOptimize(train(f.sim.dataset, f.tau, config));
  state.SetItemsProcessed(state.iterations() * config.iterations);
}
BENCHMARK(BM_TrainIteration)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
