#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "io.hpp"
#include "mqbsts/errors.hpp"
#include "mqbsts/simdata.hpp"
#include "mqbsts/trainer.hpp"

using namespace mqbsts;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mqbsts_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mqbsts");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Copies header and one data row of a dataset file, optionally dropping the target columns.
void write_future(const std::string& source, const std::string& target, std::size_t row, bool keep_targets) {
  const auto lines = lines_of(slurp(source));
  std::ofstream out(target, std::ios::binary);
  for (const std::string* line : {&lines[0], &lines[row]}) {
    const auto cells = io::split(*line, ',');
    std::string joined;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!keep_targets && c >= 1 && c <= 3) continue;
      joined += (joined.empty() ? "" : ",") + cells[c];
    }
    out << joined << '\n';
  }
}

const std::vector<std::string> kQuick = {"--tau", "0.9,0.9,0.9", "--iterations", "40", "--burn-in", "20"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("io: numbers round-trip and parse strictly") {
  for (const double v : {0.1, -3.5e-300, 1.0 / 3.0, 12345678.9, 0.0}) {
    CHECK(io::parse_number(io::format_number(v)).value() == v);
  }
  CHECK_FALSE(io::parse_number("nan").has_value());
  CHECK_FALSE(io::parse_number("inf").has_value());
  CHECK_FALSE(io::parse_number("1.5x").has_value());
  CHECK_FALSE(io::parse_number("").has_value());
  CHECK(io::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("io: dataset written and parsed back is hash-equal") {
  sim::SimConfig c;
  c.n = 25;
  c.seed = 3;
  const Dataset d = sim::generate(c).dataset;
  std::stringstream buffer;
  io::write_dataset(buffer, d);
  const auto parsed = io::read_dataset(buffer);
  CHECK(parsed.has_targets);
  CHECK(parsed.dataset.fingerprint() == d.fingerprint());
}

TEST_CASE("io: schema and value errors name the column") {
  {
    std::istringstream in("time,y.a,x.a.p\n1,2.0,nan\n");
    try {
      io::read_dataset(in);
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("x.a.p") != std::string::npos);
    }
  }
  {
    std::istringstream in("time,y.a,z.a.p\n1,2.0,3.0\n");
    CHECK_THROWS_AS(io::read_dataset(in), DataError);
  }
  {
    std::istringstream in("time,x.a.p\n1,3.0\n");
    CHECK_THROWS_AS(io::read_dataset(in, true), DataError);
    std::istringstream again("time,x.a.p\n1,3.0\n");
    const auto parsed = io::read_dataset(again, false);
    CHECK_FALSE(parsed.has_targets);
  }
  {
    std::istringstream in("time,y.a,x.a.p\n1,2.0\n");
    CHECK_THROWS_AS(io::read_dataset(in), DataError);
  }
}

TEST_CASE("io: draws table round trip") {
  sim::SimConfig sc;
  sc.n = 40;
  sc.seed = 4;
  const Dataset d = sim::generate(sc).dataset;
  McmcConfig c;
  c.iterations = 20;
  c.burn_in = 10;
  c.seed = 8;
  const QuantileSpec tau{0.2, 0.5, 0.9};
  const auto sample = train(d, tau, c);
  std::stringstream buffer;
  io::write_draws(buffer, sample, d.series_names);
  const auto parsed = io::read_draws(buffer);
  CHECK(parsed.series == d.series_names);
  CHECK(parsed.pool_sizes == std::vector<Eigen::Index>{8, 8, 8});
  const auto& s = parsed.sample;
  CHECK(s.labels == sample.labels);
  CHECK(s.tau.values() == tau.values());
  CHECK(s.fingerprint == sample.fingerprint);
  CHECK(s.config.iterations == 20);
  CHECK(s.config.seed == 8);
  REQUIRE(s.draws.size() == sample.draws.size());
  for (std::size_t i = 0; i < s.draws.size(); ++i) {
    const auto& a = s.draws[i];
    const auto& b = sample.draws[i];
    CHECK(a.iteration == b.iteration);
    CHECK(a.w == b.w);
    CHECK(a.phi_diag == b.phi_diag);
    CHECK(a.gamma == b.gamma);
    CHECK(a.beta == b.beta);
    CHECK(a.sigma_tau.matrix() == b.sigma_tau.matrix());
    REQUIRE(a.trend.has_value());
    CHECK(a.trend->mu.row(0) == b.trend->mu.bottomRows<1>());
    CHECK(a.trend->delta.row(0) == b.trend->delta.bottomRows<1>());
    CHECK(a.trend_cov->sigma_mu.matrix() == b.trend_cov->sigma_mu.matrix());
  }
}

TEST_CASE("io: config file parsing") {
  std::istringstream in("# comment\niterations = 30\n\nburn_in=10  # trailing\n");
  const auto entries = io::read_config(in);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0] == std::pair<std::string, std::string>{"iterations", "30"});
  CHECK(entries[1] == std::pair<std::string, std::string>{"burn_in", "10"});
  std::istringstream bad("no equals sign here\n");
  CHECK_THROWS(io::read_config(bad));
}

TEST_CASE("cli: simulate writes the dataset and is byte-reproducible") {
  TempDir dir;
  const auto a = run_cli({"simulate", "--n", "50", "--tau", "0.9,0.9,0.9", "--rho", "0.7", "--seed", "1", "--out", dir / "a"});
  const auto b = run_cli({"simulate", "--n", "50", "--tau", "0.9,0.9,0.9", "--rho", "0.7", "--seed", "1", "--out", dir / "b"});
  REQUIRE(a.code == cli::kOk);
  REQUIRE(b.code == cli::kOk);
  for (const char* f : {"data.csv", "truth.csv", "trend.csv"}) {
    CHECK(slurp(dir / (std::string("a/") + f)) == slurp(dir / (std::string("b/") + f)));
  }
  const auto parsed = io::read_dataset(fs::path(dir / "a/data.csv"));
  CHECK(parsed.dataset.n() == 50);
  CHECK(parsed.dataset.m() == 3);
  CHECK(parsed.dataset.predictors[0].cols() == 8);
  sim::SimConfig c;
  c.n = 50;
  c.seed = 1;
  CHECK(parsed.dataset.fingerprint() == sim::generate(c).dataset.fingerprint());

  CHECK(run_cli({"simulate", "--rho", "-0.9", "--out", dir / "c"}).code == cli::kUsage);
  CHECK(run_cli({"simulate", "--bogus"}).code == cli::kUsage);
  CHECK(run_cli({}).code == cli::kUsage);
}

TEST_CASE("cli: train, forecast and evaluate") {
  TempDir dir;
  REQUIRE(run_cli({"simulate", "--n", "60", "--seed", "2", "--out", dir / "sim"}).code == cli::kOk);
  const std::string data = dir / "sim/data.csv";

  const auto t1 = run_cli(with({"train", "--data", data, "--truth", dir / "sim/truth.csv", "--seed", "3", "--out", dir / "fit1"}, kQuick));
  REQUIRE(t1.code == cli::kOk);
  CHECK(t1.out.find("iterations=40 burn_in=20") != std::string::npos);
  CHECK(t1.out.find("phi acceptance") != std::string::npos);
  const auto t2 = run_cli(with({"train", "--data", data, "--seed", "3", "--out", dir / "fit2"}, kQuick));
  REQUIRE(t2.code == cli::kOk);
  CHECK(slurp(dir / "fit1/draws.csv") == slurp(dir / "fit2/draws.csv"));
  CHECK(slurp(dir / "fit1/inclusion.csv") == slurp(dir / "fit2/inclusion.csv"));
  CHECK(lines_of(slurp(dir / "fit1/coefficients.csv"))[0] == "label,mean,sd,truth,normalized_error");
  CHECK(lines_of(slurp(dir / "fit2/coefficients.csv"))[0] == "label,mean,sd");
  CHECK(lines_of(slurp(dir / "fit1/inclusion.csv")).size() == 25);

  write_future(data, dir / "future_x.csv", 60, false);
  write_future(data, dir / "future_xy.csv", 60, true);
  const auto f1 = run_cli({"forecast", "--draws", dir / "fit1/draws.csv", "--future", dir / "future_x.csv", "--seed", "4", "--out", dir / "fx"});
  REQUIRE(f1.code == cli::kOk);
  const auto fx = lines_of(slurp(dir / "fx/forecast.csv"));
  CHECK(fx[0] == "step,series,prediction");
  CHECK(fx.size() == 4);
  const auto f2 = run_cli({"forecast", "--draws", dir / "fit1/draws.csv", "--future", dir / "future_xy.csv", "--seed", "4", "--out", dir / "fxy"});
  REQUIRE(f2.code == cli::kOk);
  const auto fxy = lines_of(slurp(dir / "fxy/forecast.csv"));
  CHECK(fxy[0] == "step,series,prediction,realized,step_loss,cumulative_loss");
  CHECK(io::split(fxy[1], ',')[2] == io::split(fx[1], ',')[2]);

  const auto e0 = run_cli(with({"evaluate", "--data", data, "--steps", "0", "--out", dir / "e0"}, kQuick));
  CHECK(e0.code == cli::kOk);
  CHECK(lines_of(slurp(dir / "e0/forecasts.csv")).size() == 1);
  CHECK(lines_of(slurp(dir / "e0/cumulative_loss.csv")).size() == 1);
  const auto e2 = run_cli(with({"evaluate", "--data", data, "--steps", "2", "--seed", "5", "--out", dir / "e2"}, kQuick));
  REQUIRE(e2.code == cli::kOk);
  CHECK(lines_of(slurp(dir / "e2/forecasts.csv")).size() == 7);
  CHECK(lines_of(slurp(dir / "e2/cumulative_loss.csv")).size() == 3);
  CHECK(run_cli(with({"evaluate", "--data", data, "--steps", "61", "--out", dir / "e3"}, kQuick)).code == cli::kUsage);
}

TEST_CASE("cli: config file defaults are overridden by flags; unknown keys rejected") {
  TempDir dir;
  REQUIRE(run_cli({"simulate", "--n", "40", "--seed", "6", "--out", dir / "sim"}).code == cli::kOk);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# defaults\ntau = 0.9,0.9,0.9\niterations = 30\nburn_in = 10\nno_trend = true\n";
  }
  const auto r = run_cli({"train", "--data", dir / "sim/data.csv", "--config", dir / "run.cfg", "--iterations", "24", "--out", dir / "fit"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("iterations=24 burn_in=10") != std::string::npos);
  CHECK(slurp(dir / "fit/draws.csv").find("# trend=0") != std::string::npos);
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "tau = 0.5,0.5,0.5\nnot_a_key = 1\n";
  }
  CHECK(run_cli({"train", "--data", dir / "sim/data.csv", "--config", dir / "bad.cfg"}).code == cli::kUsage);
  CHECK(run_cli({"train", "--data", dir / "sim/data.csv", "--config", dir / "missing.cfg"}).code == cli::kUsage);
}

TEST_CASE("cli: data errors, numerical errors and the output-directory variable") {
  TempDir dir;
  REQUIRE(run_cli({"simulate", "--n", "40", "--seed", "7", "--out", dir / "sim"}).code == cli::kOk);
  auto lines = lines_of(slurp(dir / "sim/data.csv"));
  auto cells = io::split(lines[5], ',');
  cells[6] = "NaN";
  std::string joined;
  for (const auto& c : cells) joined += (joined.empty() ? "" : ",") + c;
  lines[5] = joined;
  {
    std::ofstream out(dir / "bad.csv", std::ios::binary);
    for (const auto& l : lines) out << l << '\n';
  }
  const auto bad = run_cli(with({"train", "--data", dir / "bad.csv", "--out", dir / "x"}, kQuick));
  CHECK(bad.code == cli::kData);
  CHECK(bad.err.find(io::split(lines[0], ',')[6]) != std::string::npos);
  CHECK(run_cli(with({"train", "--data", dir / "nope.csv"}, kQuick)).code == cli::kUsage);
  CHECK(run_cli({"train", "--data", dir / "sim/data.csv", "--tau", "0.9,0.9"}).code == cli::kUsage);

  ::setenv(cli::kOutputDirEnv, (dir / "envout").c_str(), 1);
  const auto r = run_cli({"simulate", "--n", "5", "--seed", "1"});
  ::unsetenv(cli::kOutputDirEnv);
  CHECK(r.code == cli::kOk);
  CHECK(fs::exists(dir / "envout/data.csv"));
}
