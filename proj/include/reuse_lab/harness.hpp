#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reuse_lab/model.hpp"

namespace reuse_lab {

enum class Experiment { StronglyConvexReuse, ZipfPowerReuse, ZipfLogReuse, OracleCheck, BaselineCompare };

std::string to_string(Experiment experiment);
Experiment experiment_from_string(const std::string& name);

struct EtaSearchConfig {
  int grid_points = 64;
  int refine_iters = 60;
  double eta_lo = 1e-6;
  double eta_hi = 0.0;  // 0 = (2 - 1e-6)/Lambda_1 (Zipf) or 1/D^2 (simulation)
  std::vector<double> c_grid;  // empty = default grid
  int curve_points_per_decade = 12;
  double log_tolerance = 1e-4;
};

/// One experiment per JSON document. Key names follow the JSON fields.
struct ExperimentConfig {
  Experiment experiment = Experiment::ZipfPowerReuse;
  // Strongly convex problem.
  std::size_t dimension = 100;
  double sigma = 0.1;
  std::uint64_t problem_seed = 0;
  // Zipf model ({"law": ..., "a": ..., "b": ..., "d": ...} or explicit).
  nlohmann::json model;
  std::vector<std::int64_t> k_grid;
  std::vector<double> n_grid;
  std::int64_t replicas = 500;
  std::uint64_t base_seed = 0;
  EtaSearchConfig eta_search;
  std::optional<double> eta;  // single-evaluation subcommands
  double r_star = 15.39;
  double oracle_eta = 0.5;
  bool record_wall_time = false;
  std::string output_path;
  std::string plot_path;
  std::string figure = "reuse_vs_log_n";
  std::size_t threads = 0;

  /// Grids non-empty and strictly increasing; replicas >= 2 for simulations.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Zipf model of a Zipf experiment (the default depends on the experiment).
ZipfModel zipf_model_for(const ExperimentConfig& config);
Problem problem_for(const ExperimentConfig& config);

struct ResultRow {
  std::string experiment;
  std::int64_t k = 0;
  double n = 0.0;
  std::optional<double> eta_star;
  std::optional<double> risk_star;
  std::optional<double> risk_std_error;
  std::optional<double> n_prime;
  std::optional<double> e_value;
  std::optional<double> e_lower;
  std::optional<double> e_upper;
  std::optional<double> baseline_e_value;
  std::optional<double> oracle_abs_diff;
  std::optional<double> wall_time_seconds;
  std::string error;  // empty when the cell succeeded

  bool operator==(const ResultRow&) const = default;
};

using RowSink = std::function<void(const ResultRow&)>;

/// Runs every (K, N) cell. Rows come back (and reach `sink`) in grid order,
/// K-major. Cell failures are recorded in the row's `error` field.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RowSink& sink = {});

/// Shortest decimal string that parses back to the same double.
std::string format_real(double value);

/// Column names, in CSV order.
std::span<const std::string_view> csv_columns();

std::string csv_header();
std::string csv_line(const ResultRow& row);

/// RFC-4180 CSV with the csv_columns() header. Throws on empty input or an
/// unwritable path; nothing is written in either case.
void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> parse_csv(const std::filesystem::path& path);
std::vector<ResultRow> parse_csv_text(std::string_view text);

enum class Figure { ReuseVsLogN, ReuseVsK };

Figure figure_from_string(const std::string& name);
std::string to_string(Figure figure);

/// Plot-data grouped by curve: one series per K (x = log N) or per N (x = K).
nlohmann::json plotdata(std::span<const ResultRow> rows, Figure figure);
void emit_plotdata(std::span<const ResultRow> rows, Figure figure, const std::filesystem::path& path);

/// Exact zipf risk by summing over all count vectors (n_1..n_d) of an
/// N-point dataset, weighted by their multinomial probabilities.
double zipf_risk_by_enumeration(const ZipfModel& model, std::int64_t epochs, int n, double eta);

struct OracleReport {
  std::size_t cases = 0;
  double max_abs_diff = 0.0;
};

/// zipf_risk vs enumeration over d <= 3, N <= 4, K <= 3, eta in {0.1, 0.5, 1.0},
/// `models_per_shape` random models per dimension.
OracleReport oracle_sweep(std::uint64_t seed, int models_per_shape = 3);

}  // namespace reuse_lab
