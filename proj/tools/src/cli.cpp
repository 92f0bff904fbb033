#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "io.hpp"
#include "mqbsts/errors.hpp"
#include "mqbsts/forecaster.hpp"
#include "mqbsts/simdata.hpp"
#include "mqbsts/trainer.hpp"

namespace mqbsts::cli {

namespace fs = std::filesystem;

namespace {

struct McmcFlags {
  int iterations = 400;
  int burn_in = 200;
  double threshold = 0.8;
  std::string phi_init;
  std::string phi_step;
  bool no_adapt = false;
  double pi = 0.5;
  double b_gamma = 0.0;
  double kappa = 0.01;
  double r_squared = 0.8;
  double v0 = 5.0;
  double nu_alpha = 0.01;
  double v_alpha = 0.01;
  std::string w_exponent = "joint";
  bool scale_trend_by_w = false;
  bool no_trend = false;
  std::string trend_d;
  std::string trend_lambda;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;

  Eigen::Index n = 500;
  std::string tau;
  double rho = 0.7;

  std::string data;
  std::string truth;
  int chains = 1;
  McmcFlags mcmc;

  std::string draws;
  std::string future;

  int steps = 10;
  bool no_refit = false;
  Eigen::Index window = 0;
};

Vector parse_list(const std::string& text, const std::string& flag) {
  Vector v(0);
  if (text.empty()) return v;
  const auto parts = io::split(text, ',');
  v.resize(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto x = io::parse_number(parts[i]);
    if (!x) throw ArgumentError(flag + ": '" + parts[i] + "' is not a number");
    v[static_cast<Eigen::Index>(i)] = *x;
  }
  return v;
}

McmcConfig to_mcmc(const RunConfig& rc) {
  const McmcFlags& f = rc.mcmc;
  McmcConfig c;
  c.iterations = f.iterations;
  c.burn_in = f.burn_in;
  c.seed = rc.seed;
  c.threshold_inclusion = f.threshold;
  c.phi_init = parse_list(f.phi_init, "--phi-init");
  c.phi_step = parse_list(f.phi_step, "--phi-step");
  c.adapt_phi_step = !f.no_adapt;
  c.pi = f.pi;
  c.b_gamma = f.b_gamma;
  c.kappa = f.kappa;
  c.r_squared = f.r_squared;
  c.v0 = f.v0;
  c.nu_alpha = f.nu_alpha;
  c.v_alpha = f.v_alpha;
  c.w_exponent = f.w_exponent == "literal" ? WExponent::Literal : WExponent::Joint;
  c.scale_trend_by_w = f.scale_trend_by_w;
  c.trend = !f.no_trend;
  c.trend_d = parse_list(f.trend_d, "--trend-d");
  c.trend_lambda = parse_list(f.trend_lambda, "--trend-lambda");
  return c;
}

QuantileSpec to_tau(const std::string& text) { return QuantileSpec(parse_list(text, "--tau")); }

void add_common(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--seed", rc.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", rc.out, "Output directory (default: $" + std::string(kOutputDirEnv) + " or .)");
  sub->add_option("--config", rc.config, "File of key = value defaults, overridden by flags")
      ->check(CLI::ExistingFile);
}

void add_mcmc(CLI::App* sub, RunConfig& rc) {
  McmcFlags& f = rc.mcmc;
  sub->add_option("--tau", rc.tau, "Quantile level per series, comma separated")->required();
  sub->add_option("--iterations", f.iterations, "MCMC iterations")->capture_default_str();
  sub->add_option("--burn-in", f.burn_in, "Discarded leading iterations")->capture_default_str();
  sub->add_option("--threshold", f.threshold, "Inclusion probability threshold")->capture_default_str();
  sub->add_option("--phi-init", f.phi_init, "Initial Phi diagonal, comma separated (default 0.1 each)");
  sub->add_option("--phi-step", f.phi_step, "Log-scale MH step per series (default 0.05 each)");
  sub->add_flag("--no-adapt", f.no_adapt, "Keep the Phi step sizes fixed during burn-in");
  sub->add_option("--pi", f.pi, "Prior inclusion probability")->capture_default_str();
  sub->add_option("--b-gamma", f.b_gamma, "Prior coefficient mean")->capture_default_str();
  sub->add_option("--kappa", f.kappa, "Prior precision weight")->capture_default_str();
  sub->add_option("--r2", f.r_squared, "Expected R^2 for the Sigma_tau prior")->capture_default_str();
  sub->add_option("--v0", f.v0, "Sigma_tau prior degrees of freedom")->capture_default_str();
  sub->add_option("--nu-alpha", f.nu_alpha, "Trend covariance prior degrees of freedom")->capture_default_str();
  sub->add_option("--v-alpha", f.v_alpha, "Trend covariance prior scale")->capture_default_str();
  sub->add_option("--w-exponent", f.w_exponent, "W posterior exponent: joint or literal")
      ->check(CLI::IsMember({"joint", "literal"}))
      ->capture_default_str();
  sub->add_flag("--scale-trend-by-w", f.scale_trend_by_w, "Divide trend increments by W in the covariance update");
  sub->add_flag("--no-trend", f.no_trend, "Drop the trend component");
  sub->add_option("--trend-d", f.trend_d, "Long-run slope per series (default 0)");
  sub->add_option("--trend-lambda", f.trend_lambda, "Slope persistence per series (default 1)");
}

fs::path output_dir(const RunConfig& rc) {
  std::string dir = rc.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = (env != nullptr && *env != '\0') ? env : ".";
  }
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw DataError("cannot create output directory " + path.string());
  return path;
}

// Expands --config into leading flags so that explicit flags, parsed later, win.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;
  if (!fs::is_regular_file(config_path)) throw CLI::ValidationError("--config", "file does not exist: " + config_path);

  std::vector<std::string> expanded{args[0], args[1]};
  for (auto [key, value] : io::read_config(fs::path(config_path))) {
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    if (key == "config") throw CLI::ValidationError("--config", "config files cannot include other config files");
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ValidationError("--config", "unknown key '" + key + "' for " + args[1]);
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        expanded.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw CLI::ValidationError("--config", "key '" + key + "' expects true or false");
      }
    } else {
      expanded.push_back("--" + key);
      expanded.push_back(value);
    }
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  sim::SimConfig config;
  config.n = rc.n;
  config.rho = rc.rho;
  config.seed = rc.seed;
  if (!rc.tau.empty()) config.tau = parse_list(rc.tau, "--tau");
  const sim::SimResult result = sim::generate(config);
  const fs::path dir = output_dir(rc);
  io::write_dataset(dir / "data.csv", result.dataset);
  io::write_truth(dir / "truth.csv", config, result.truth, result.dataset);
  io::write_trend(dir / "trend.csv", result.truth.mu, result.truth.delta, result.dataset.series_names);
  out << "wrote " << result.dataset.n() << " rows, " << result.dataset.m() << " series, " << sim::kPredictors
      << " predictors per series to " << dir.string() << '\n';
  return kOk;
}

void write_train_outputs(const fs::path& dir, const PosteriorSample& sample, const Dataset& data,
                         const std::optional<Vector>& truth, std::ostream& out) {
  fs::create_directories(dir);
  io::write_draws(dir / "draws.csv", sample, data.series_names);
  const InclusionTable inclusion = inclusion_probabilities(sample);
  io::write_inclusion(dir / "inclusion.csv", inclusion, sample.config.threshold_inclusion);
  io::write_coefficients(dir / "coefficients.csv", posterior_coefficient_summary(sample, truth), truth);

  out << "iterations=" << sample.config.iterations << " burn_in=" << sample.config.burn_in
      << " retained=" << sample.draws.size() << " seed=" << sample.config.seed << '\n';
  out << "phi acceptance:";
  for (Eigen::Index i = 0; i < sample.phi_acceptance.size(); ++i) {
    out << ' ' << data.series_names[static_cast<std::size_t>(i)] << '=' << std::fixed << std::setprecision(3)
        << sample.phi_acceptance[i];
  }
  out << std::defaultfloat << '\n';
  const Eigen::VectorXi selected = inclusion.selected(sample.config.threshold_inclusion);
  out << "selected " << selected.sum() << " of " << selected.size() << " at threshold "
      << sample.config.threshold_inclusion << ':';
  for (Eigen::Index k = 0; k < selected.size(); ++k) {
    if (selected[k] != 0) out << ' ' << inclusion.labels[static_cast<std::size_t>(k)];
  }
  out << "\nwrote " << dir.string() << '\n';
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const Dataset data = io::read_dataset(fs::path(rc.data)).dataset;
  const QuantileSpec tau = to_tau(rc.tau);
  const McmcConfig config = to_mcmc(rc);
  std::optional<Vector> truth;
  if (!rc.truth.empty()) truth = io::read_truth_beta(fs::path(rc.truth), data.coefficient_labels());
  const fs::path dir = output_dir(rc);
  if (rc.chains <= 1) {
    write_train_outputs(dir, train(data, tau, config), data, truth, out);
    return kOk;
  }
  const auto samples = train_chains(data, tau, config, rc.chains);
  for (std::size_t c = 0; c < samples.size(); ++c) {
    write_train_outputs(dir / ("chain_" + std::to_string(c + 1)), samples[c], data, truth, out);
  }
  return kOk;
}

std::vector<Vector> predictors_row(const Dataset& data, Eigen::Index row) {
  std::vector<Vector> rows;
  for (const Matrix& x : data.predictors) rows.push_back(x.row(row).transpose());
  return rows;
}

int cmd_forecast(const RunConfig& rc, std::ostream& out) {
  const io::DrawsFile draws = io::read_draws(fs::path(rc.draws));
  const io::ParsedDataset future = io::read_dataset(fs::path(rc.future), false);
  const Dataset& f = future.dataset;
  if (f.series_names != draws.series) {
    throw ArgumentError("forecast: future file series do not match the trained series");
  }
  if (f.coefficient_labels() != draws.sample.labels) {
    throw ArgumentError("forecast: future predictor columns do not match the trained pools");
  }
  const QuantileSpec& tau = draws.sample.tau;
  Rng rng(rc.seed);
  const ForecastResult result = forecast_one_step(draws.sample, predictors_row(f, 0), tau, draws.sample.hyper, rng);

  const fs::path dir = output_dir(rc);
  std::ofstream file(dir / "forecast.csv", std::ios::binary);
  if (!file) throw DataError("cannot write " + (dir / "forecast.csv").string());
  file << "step,series,prediction" << (future.has_targets ? ",realized,step_loss,cumulative_loss" : "") << '\n';
  Vector loss;
  if (future.has_targets) loss = forecast_loss(result.prediction, f.y.row(0).transpose(), tau);
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    file << 1 << ',' << f.series_names[static_cast<std::size_t>(i)] << ',' << io::format_number(result.prediction[i]);
    if (future.has_targets) {
      file << ',' << io::format_number(f.y(0, i)) << ',' << io::format_number(loss[i]) << ','
           << io::format_number(loss[i]);
    }
    file << '\n';
  }
  out << "forecast for row " << result.horizon + 1 << " from " << draws.sample.draws.size() << " draws:";
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    out << ' ' << f.series_names[static_cast<std::size_t>(i)] << '=' << result.prediction[i];
  }
  out << "\nwrote " << (dir / "forecast.csv").string() << '\n';
  return kOk;
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
  const Dataset data = io::read_dataset(fs::path(rc.data)).dataset;
  const QuantileSpec tau = to_tau(rc.tau);
  const McmcConfig config = to_mcmc(rc);
  RollingOptions options;
  options.refit = !rc.no_refit;
  options.initial_window = rc.window;
  const auto steps = rolling_evaluate(data, tau, config, rc.steps, options);

  const fs::path dir = output_dir(rc);
  std::ofstream table(dir / "forecasts.csv", std::ios::binary);
  std::ofstream totals(dir / "cumulative_loss.csv", std::ios::binary);
  if (!table || !totals) throw DataError("cannot write evaluation tables in " + dir.string());
  table << "step,series,prediction,realized,step_loss,cumulative_loss,baseline,baseline_step_loss,"
           "baseline_cumulative_loss\n";
  totals << "step,row,cumulative_loss,baseline_cumulative_loss\n";
  Vector running = Vector::Zero(data.m());
  Vector running_base = Vector::Zero(data.m());
  for (std::size_t h = 0; h < steps.size(); ++h) {
    const RollingStep& s = steps[h];
    running += s.loss;
    running_base += s.baseline_loss;
    for (Eigen::Index i = 0; i < data.m(); ++i) {
      table << h + 1 << ',' << data.series_names[static_cast<std::size_t>(i)] << ','
            << io::format_number(s.prediction[i]) << ',' << io::format_number(s.realized[i]) << ','
            << io::format_number(s.loss[i]) << ',' << io::format_number(running[i]) << ','
            << io::format_number(s.baseline[i]) << ',' << io::format_number(s.baseline_loss[i]) << ','
            << io::format_number(running_base[i]) << '\n';
    }
    totals << h + 1 << ',' << s.row + 1 << ',' << io::format_number(s.cumulative_loss) << ','
           << io::format_number(s.baseline_cumulative_loss) << '\n';
  }
  if (steps.empty()) {
    out << "no evaluation steps requested\n";
  } else {
    out << "cumulative quantile loss after " << steps.size() << " steps: model " << steps.back().cumulative_loss
        << ", empirical-quantile baseline " << steps.back().baseline_cumulative_loss << '\n';
  }
  out << "wrote " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Multivariate quantile Bayesian structural time series"};
  app.name(argc > 0 ? fs::path(argv[0]).filename().string() : "mqbsts");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CLI::App* simulate = app.add_subcommand("simulate", "Generate the three-series benchmark dataset");
  add_common(simulate, rc);
  simulate->add_option("--n", rc.n, "Number of rows")->capture_default_str();
  simulate->add_option("--tau", rc.tau, "Quantile level per series (default 0.9,0.9,0.9)");
  simulate->add_option("--rho", rc.rho, "Pairwise error correlation")->capture_default_str();

  CLI::App* train_cmd = app.add_subcommand("train", "Fit the model and summarize variable selection");
  add_common(train_cmd, rc);
  train_cmd->add_option("--data", rc.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--truth", rc.truth, "Truth sidecar for normalized errors")->check(CLI::ExistingFile);
  train_cmd->add_option("--chains", rc.chains, "Independent chains run concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_mcmc(train_cmd, rc);

  CLI::App* forecast = app.add_subcommand("forecast", "One-step-ahead forecast from a draws table");
  add_common(forecast, rc);
  forecast->add_option("--draws", rc.draws, "draws.csv written by train")->required()->check(CLI::ExistingFile);
  forecast->add_option("--future", rc.future, "Dataset CSV whose first row holds the next predictors")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Rolling one-step-ahead evaluation against a baseline");
  add_common(evaluate, rc);
  evaluate->add_option("--data", rc.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--steps", rc.steps, "Number of one-step forecasts")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  evaluate->add_option("--window", rc.window, "Initial training rows (default: rows - steps)");
  evaluate->add_flag("--no-refit", rc.no_refit, "Fit once and extend the trend instead of refitting");
  add_mcmc(evaluate, rc);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args, app);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(rc, out);
    if (train_cmd->parsed()) return cmd_train(rc, out);
    if (forecast->parsed()) return cmd_forecast(rc, out);
    return cmd_evaluate(rc, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace mqbsts::cli
