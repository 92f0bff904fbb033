#include "io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "mqbsts/errors.hpp"

namespace mqbsts::io {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::string join(const std::vector<std::string>& parts, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += delimiter;
    out += parts[i];
  }
  return out;
}

std::string join_numbers(const Vector& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(format_number(v[i]));
  return join(parts, ',');
}

Vector parse_numbers(const std::string& text, const std::string& what) {
  if (text.empty()) return Vector(0);
  const auto parts = split(text, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto x = parse_number(trim(parts[i]));
    if (!x) throw DataError("draws: malformed " + what + " value '" + parts[i] + "'");
    v[static_cast<Eigen::Index>(i)] = *x;
  }
  return v;
}

std::vector<std::string> vech_names(const std::string& prefix, Eigen::Index m) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) {
      names.push_back(prefix + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    }
  }
  return names;
}

void push_vech(std::vector<double>& row, const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j; i < a.rows(); ++i) row.push_back(a(i, j));
  }
}

Matrix read_vech(const std::vector<double>& row, std::size_t& pos, Eigen::Index m) {
  Matrix a(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) {
      a(i, j) = row[pos++];
      a(j, i) = a(i, j);
    }
  }
  return a;
}

std::vector<std::string> indexed(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < count; ++i) names.push_back(prefix + "_" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> draw_columns(Eigen::Index m, Eigen::Index k, bool trend) {
  std::vector<std::string> cols{"iteration", "W"};
  auto append = [&cols](const std::vector<std::string>& more) { cols.insert(cols.end(), more.begin(), more.end()); };
  append(indexed("Phi", m));
  append(vech_names("Sigma_tau", m));
  append(indexed("gamma", k));
  append(indexed("beta", k));
  if (trend) {
    append(vech_names("Sigma_mu", m));
    append(vech_names("Sigma_delta", m));
    append(indexed("mu_last", m));
    append(indexed("delta_last", m));
  }
  return cols;
}

const char* exponent_name(WExponent e) { return e == WExponent::Joint ? "joint" : "literal"; }

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  dataset.validate();
  std::vector<std::string> header{"time"};
  for (const auto& s : dataset.series_names) header.push_back("y." + s);
  for (Eigen::Index i = 0; i < dataset.m(); ++i) {
    for (const auto& p : dataset.predictor_names[static_cast<std::size_t>(i)]) {
      header.push_back("x." + dataset.series_names[static_cast<std::size_t>(i)] + "." + p);
    }
  }
  out << join(header, ',') << '\n';
  for (Eigen::Index t = 0; t < dataset.n(); ++t) {
    out << (t + 1);
    for (Eigen::Index i = 0; i < dataset.m(); ++i) out << ',' << format_number(dataset.y(t, i));
    for (const Matrix& x : dataset.predictors) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) out << ',' << format_number(x(t, j));
    }
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_output(path);
  write_dataset(out, dataset);
}

ParsedDataset read_dataset(std::istream& in, bool require_targets) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset: empty file");
  const auto header = split(trim(line), ',');
  if (header.empty() || trim(header[0]) != "time") throw DataError("dataset: first column must be 'time'");

  struct Column {
    bool target;
    std::size_t series;
    std::size_t predictor;
  };
  std::vector<std::string> series;
  std::vector<std::vector<std::string>> predictors;
  std::vector<Column> columns;
  auto series_index = [&series, &predictors](const std::string& name) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series[i] == name) return i;
    }
    series.push_back(name);
    predictors.emplace_back();
    return series.size() - 1;
  };

  std::vector<bool> seen_target;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    const auto parts = split(name, '.');
    if (parts.size() == 2 && parts[0] == "y" && !parts[1].empty()) {
      const std::size_t s = series_index(parts[1]);
      if (seen_target.size() <= s) seen_target.resize(s + 1, false);
      if (seen_target[s]) throw DataError("dataset: duplicate column '" + name + "'");
      seen_target[s] = true;
      columns.push_back({true, s, 0});
    } else if (parts.size() == 3 && parts[0] == "x" && !parts[1].empty() && !parts[2].empty()) {
      const std::size_t s = series_index(parts[1]);
      auto& pool = predictors[s];
      for (const auto& p : pool) {
        if (p == parts[2]) throw DataError("dataset: duplicate column '" + name + "'");
      }
      pool.push_back(parts[2]);
      columns.push_back({false, s, pool.size() - 1});
    } else {
      throw DataError("dataset: unrecognized column '" + name + "' (expected y.<series> or x.<series>.<predictor>)");
    }
  }
  seen_target.resize(series.size(), false);
  const bool any_target = std::find(seen_target.begin(), seen_target.end(), true) != seen_target.end();
  if (any_target || require_targets) {
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (!seen_target[s]) throw DataError("dataset: missing target column 'y." + series[s] + "'");
    }
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (predictors[s].empty()) throw DataError("dataset: series '" + series[s] + "' has no predictor columns");
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != header.size()) {
      throw DataError("dataset: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = parse_number(trim(cells[c]));
      if (!v) {
        throw DataError("dataset: column '" + trim(header[c]) + "' line " + std::to_string(line_no) +
                        ": invalid number '" + cells[c] + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("dataset: no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(series.size());
  ParsedDataset parsed;
  parsed.has_targets = any_target;
  Dataset& d = parsed.dataset;
  d.y = Matrix::Zero(n, m);
  d.series_names = series;
  d.predictor_names = predictors;
  for (const auto& pool : predictors) d.predictors.emplace_back(n, static_cast<Eigen::Index>(pool.size()));
  for (Eigen::Index t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const Column& col = columns[c];
      const double v = rows[static_cast<std::size_t>(t)][c];
      if (col.target) {
        d.y(t, static_cast<Eigen::Index>(col.series)) = v;
      } else {
        d.predictors[col.series](t, static_cast<Eigen::Index>(col.predictor)) = v;
      }
    }
  }
  d.validate();
  return parsed;
}

ParsedDataset read_dataset(const std::filesystem::path& path, bool require_targets) {
  auto in = open_input(path);
  return read_dataset(in, require_targets);
}

void write_truth(const std::filesystem::path& path, const sim::SimConfig& config, const sim::SimTruth& truth,
                 const Dataset& dataset) {
  auto out = open_output(path);
  out << "parameter,series,predictor,value\n";
  for (Eigen::Index i = 0; i < truth.b.cols(); ++i) {
    const auto& s = dataset.series_names[static_cast<std::size_t>(i)];
    for (Eigen::Index p = 0; p < truth.b.rows(); ++p) {
      out << "beta," << s << ',' << dataset.predictor_names[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)]
          << ',' << format_number(truth.b(p, i)) << '\n';
    }
  }
  for (Eigen::Index i = 0; i < truth.b.cols(); ++i) {
    const auto& s = dataset.series_names[static_cast<std::size_t>(i)];
    out << "tau," << s << ",," << format_number(config.tau[i]) << '\n';
    out << "phi," << s << ",," << format_number(truth.link.phi_diag[i]) << '\n';
    out << "phi_eps," << s << ",," << format_number(truth.link.phi_eps[i]) << '\n';
    out << "D," << s << ",," << format_number(truth.d[i]) << '\n';
    out << "lambda," << s << ",," << format_number(truth.lambda[i]) << '\n';
  }
  out << "rho,,," << format_number(config.rho) << '\n';
  out << "x4_variance,,," << format_number(truth.x4_variance) << '\n';
  out << "n,,," << config.n << '\n';
  out << "seed,,," << config.seed << '\n';
}

Vector read_truth_beta(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "parameter,series,predictor,value") throw DataError("truth: unexpected header in " + path.string());
  std::map<std::string, double> beta;
  while (std::getline(in, line)) {
    const auto cells = split(trim(line), ',');
    if (cells.size() != 4 || cells[0] != "beta") continue;
    const auto v = parse_number(cells[3]);
    if (!v) throw DataError("truth: invalid value for " + cells[1] + "." + cells[2]);
    beta[cells[1] + "." + cells[2]] = *v;
  }
  Vector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto it = beta.find(labels[k]);
    if (it == beta.end()) throw DataError("truth: no coefficient for '" + labels[k] + "'");
    out[static_cast<Eigen::Index>(k)] = it->second;
  }
  return out;
}

void write_trend(const std::filesystem::path& path, const Matrix& mu, const Matrix& delta,
                 const std::vector<std::string>& series) {
  auto out = open_output(path);
  out << "time";
  for (const auto& s : series) out << ",mu." << s;
  for (const auto& s : series) out << ",delta." << s;
  out << '\n';
  for (Eigen::Index t = 0; t < mu.rows(); ++t) {
    out << (t + 1);
    for (Eigen::Index i = 0; i < mu.cols(); ++i) out << ',' << format_number(mu(t, i));
    for (Eigen::Index i = 0; i < delta.cols(); ++i) out << ',' << format_number(delta(t, i));
    out << '\n';
  }
}

void write_draws(std::ostream& out, const PosteriorSample& sample, const std::vector<std::string>& series) {
  if (sample.draws.empty()) throw ArgumentError("draws: empty posterior sample");
  const McmcConfig& c = sample.config;
  const Eigen::Index m = sample.tau.size();
  const Eigen::Index k = sample.draws.front().beta.size();
  const bool trend = sample.hyper.enabled;

  std::vector<std::string> pools;
  {
    std::map<std::string, int> counts;
    for (const auto& label : sample.labels) ++counts[label.substr(0, label.find('.'))];
    for (const auto& s : series) pools.push_back(std::to_string(counts[s]));
  }
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << sample.fingerprint.hash;

  out << "# mqbsts draws\n";
  out << "# iterations=" << c.iterations << '\n';
  out << "# burn_in=" << c.burn_in << '\n';
  out << "# seed=" << c.seed << '\n';
  out << "# threshold=" << format_number(c.threshold_inclusion) << '\n';
  out << "# w_exponent=" << exponent_name(c.w_exponent) << '\n';
  out << "# tau=" << join_numbers(sample.tau.values()) << '\n';
  out << "# series=" << join(series, ',') << '\n';
  out << "# pools=" << join(pools, ',') << '\n';
  out << "# labels=" << join(sample.labels, ',') << '\n';
  out << "# trend=" << (trend ? 1 : 0) << '\n';
  out << "# trend_d=" << join_numbers(sample.hyper.D) << '\n';
  out << "# trend_lambda=" << join_numbers(sample.hyper.lambda) << '\n';
  out << "# rows=" << sample.fingerprint.rows << '\n';
  out << "# data_hash=" << hash.str() << '\n';
  out << "# phi_acceptance=" << join_numbers(sample.phi_acceptance) << '\n';
  out << "# phi_step=" << join_numbers(sample.phi_step) << '\n';
  out << join(draw_columns(m, k, trend), ',') << '\n';

  for (const McmcDraw& d : sample.draws) {
    std::vector<double> row{d.w};
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(d.phi_diag[i]);
    push_vech(row, d.sigma_tau.matrix());
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(d.gamma[j]);
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(d.beta[j]);
    if (trend) {
      push_vech(row, d.trend_cov->sigma_mu.matrix());
      push_vech(row, d.trend_cov->sigma_delta.matrix());
      for (Eigen::Index i = 0; i < m; ++i) row.push_back(d.trend->mu(d.trend->mu.rows() - 1, i));
      for (Eigen::Index i = 0; i < m; ++i) row.push_back(d.trend->delta(d.trend->delta.rows() - 1, i));
    }
    out << d.iteration;
    for (double v : row) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_draws(const std::filesystem::path& path, const PosteriorSample& sample,
                 const std::vector<std::string>& series) {
  auto out = open_output(path);
  write_draws(out, sample, series);
}

DrawsFile read_draws(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      const auto body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    header = trim(line);
    break;
  }
  auto require = [&meta](const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DataError("draws: missing metadata '" + key + "'");
    return it->second;
  };
  auto integer = [&require](const std::string& key) {
    const auto v = parse_number(require(key));
    if (!v || *v != std::floor(*v)) throw DataError("draws: metadata '" + key + "' is not an integer");
    return *v;
  };

  DrawsFile file;
  file.series = split(require("series"), ',');
  const Eigen::Index m = static_cast<Eigen::Index>(file.series.size());
  for (const auto& p : split(require("pools"), ',')) {
    const auto v = parse_number(p);
    if (!v || *v < 1) throw DataError("draws: malformed pools metadata");
    file.pool_sizes.push_back(static_cast<Eigen::Index>(*v));
  }
  PosteriorSample& sample = file.sample;
  sample.labels = split(require("labels"), ',');
  const Eigen::Index k = static_cast<Eigen::Index>(sample.labels.size());
  McmcConfig& c = sample.config;
  c.iterations = static_cast<int>(integer("iterations"));
  c.burn_in = static_cast<int>(integer("burn_in"));
  c.seed = std::stoull(require("seed"));
  c.threshold_inclusion = parse_numbers(require("threshold"), "threshold")[0];
  c.w_exponent = require("w_exponent") == "literal" ? WExponent::Literal : WExponent::Joint;
  sample.tau = QuantileSpec(parse_numbers(require("tau"), "tau"));
  const bool trend = integer("trend") != 0.0;
  c.trend = trend;
  c.trend_d = parse_numbers(require("trend_d"), "trend_d");
  c.trend_lambda = parse_numbers(require("trend_lambda"), "trend_lambda");
  sample.hyper = c.trend_hyper(m);
  sample.fingerprint.rows = static_cast<Eigen::Index>(integer("rows"));
  sample.fingerprint.series = m;
  sample.fingerprint.predictors = k;
  sample.fingerprint.hash = std::stoull(require("data_hash"), nullptr, 16);
  sample.phi_acceptance = parse_numbers(meta.count("phi_acceptance") ? meta["phi_acceptance"] : "", "phi_acceptance");
  sample.phi_step = parse_numbers(meta.count("phi_step") ? meta["phi_step"] : "", "phi_step");
  if (sample.tau.size() != m) throw DataError("draws: tau and series metadata disagree");

  const auto expected = draw_columns(m, k, trend);
  if (header != join(expected, ',')) throw DataError("draws: column header does not match the metadata");

  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != expected.size()) {
      throw DataError("draws: row " + std::to_string(line_no) + " has the wrong number of cells");
    }
    std::vector<double> row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto v = parse_number(cells[i]);
      if (!v) throw DataError("draws: column '" + expected[i] + "' row " + std::to_string(line_no) + " is invalid");
      row.push_back(*v);
    }
    std::size_t pos = 0;
    const int iteration = static_cast<int>(row[pos++]);
    const double w = row[pos++];
    Vector phi(m);
    for (Eigen::Index i = 0; i < m; ++i) phi[i] = row[pos++];
    const Matrix sigma_tau = read_vech(row, pos, m);
    Eigen::VectorXi gamma(k);
    for (Eigen::Index j = 0; j < k; ++j) gamma[j] = row[pos++] != 0.0 ? 1 : 0;
    Vector beta(k);
    for (Eigen::Index j = 0; j < k; ++j) beta[j] = row[pos++];
    McmcDraw draw{iteration, std::nullopt, std::nullopt, gamma, beta, SymmetricPD(sigma_tau), phi, w};
    if (trend) {
      const Matrix sigma_mu = read_vech(row, pos, m);
      const Matrix sigma_delta = read_vech(row, pos, m);
      TrendPaths paths{Matrix(1, m), Matrix(1, m)};
      for (Eigen::Index i = 0; i < m; ++i) paths.mu(0, i) = row[pos++];
      for (Eigen::Index i = 0; i < m; ++i) paths.delta(0, i) = row[pos++];
      draw.trend = paths;
      draw.trend_cov = TrendCovariances{SymmetricPD(sigma_mu), SymmetricPD(sigma_delta)};
    }
    sample.draws.push_back(std::move(draw));
  }
  if (sample.draws.empty()) throw DataError("draws: no draw rows");
  return file;
}

DrawsFile read_draws(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_draws(in);
}

void write_inclusion(const std::filesystem::path& path, const InclusionTable& table, double threshold) {
  auto out = open_output(path);
  out << "label,probability,selected\n";
  const Eigen::VectorXi selected = table.selected(threshold);
  for (std::size_t k = 0; k < table.labels.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out << table.labels[k] << ',' << format_number(table.probability[j]) << ',' << selected[j] << '\n';
  }
}

void write_coefficients(const std::filesystem::path& path, const std::vector<CoefficientSummary>& rows,
                        const std::optional<Vector>& truth) {
  auto out = open_output(path);
  out << "label,mean,sd" << (truth ? ",truth,normalized_error" : "") << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    out << r.label << ',' << format_number(r.mean) << ',' << format_number(r.sd);
    if (truth) {
      out << ',' << format_number((*truth)[static_cast<Eigen::Index>(k)]) << ',';
      if (r.normalized_error) out << format_number(*r.normalized_error);
    }
    out << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> read_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: line " + std::to_string(line_no) + " is not of the form key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw DataError("config: line " + std::to_string(line_no) + " has an empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_config(in);
}

}  // namespace mqbsts::io
