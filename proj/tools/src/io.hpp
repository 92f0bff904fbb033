#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mqbsts/forecaster.hpp"
#include "mqbsts/model.hpp"
#include "mqbsts/simdata.hpp"
#include "mqbsts/trainer.hpp"

namespace mqbsts::io {

// Shortest decimal that parses back to the same double.
std::string format_number(double value);
// Full-string decimal parse; rejects empty, trailing text and non-finite values.
std::optional<double> parse_number(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

// Wide dataset CSV: time, y.<series>..., x.<series>.<predictor>...
void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

struct ParsedDataset {
  Dataset dataset;
  // False when the file has no y.<series> columns; dataset.y is then zero.
  bool has_targets = true;
};

// Throws DataError naming the offending column or row.
ParsedDataset read_dataset(std::istream& in, bool require_targets = true);
ParsedDataset read_dataset(const std::filesystem::path& path, bool require_targets = true);

// Long-format truth sidecar: parameter,series,predictor,value.
void write_truth(const std::filesystem::path& path, const sim::SimConfig& config, const sim::SimTruth& truth,
                 const Dataset& dataset);
// Coefficients from a truth sidecar, ordered to match labels ("series.predictor").
Vector read_truth_beta(const std::filesystem::path& path, const std::vector<std::string>& labels);
// time, mu.<series>..., delta.<series>...
void write_trend(const std::filesystem::path& path, const Matrix& mu, const Matrix& delta,
                 const std::vector<std::string>& series);

// One row per retained draw. Metadata as leading "# key=value" lines, then
// iteration, W, Phi_1..m, Sigma_tau_i_j (vech), gamma_1..K, beta_1..K and, with a
// trend, Sigma_mu_i_j, Sigma_delta_i_j, mu_last_1..m, delta_last_1..m.
void write_draws(std::ostream& out, const PosteriorSample& sample, const std::vector<std::string>& series);
void write_draws(const std::filesystem::path& path, const PosteriorSample& sample,
                 const std::vector<std::string>& series);

struct DrawsFile {
  PosteriorSample sample;
  std::vector<std::string> series;
  // Predictors per series, in stacking order.
  std::vector<Eigen::Index> pool_sizes;
};
DrawsFile read_draws(std::istream& in);
DrawsFile read_draws(const std::filesystem::path& path);

void write_inclusion(const std::filesystem::path& path, const InclusionTable& table, double threshold);
void write_coefficients(const std::filesystem::path& path, const std::vector<CoefficientSummary>& rows,
                        const std::optional<Vector>& truth);

// Flat "key = value" lines, '#' comments, blank lines ignored. Throws DataError on
// malformed lines.
std::vector<std::pair<std::string, std::string>> read_config(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path);

}  // namespace mqbsts::io
