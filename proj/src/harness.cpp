#include "reuse_lab/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <boost/random/uniform_real_distribution.hpp>

#include "reuse_lab/closed_form.hpp"
#include "reuse_lab/parallel.hpp"
#include "reuse_lab/reuse.hpp"
#include "reuse_lab/rng.hpp"
#include "reuse_lab/serialize.hpp"

namespace reuse_lab {

using nlohmann::json;

namespace {

constexpr double kOracleTolerance = 1e-12;

template <class T>
void require_increasing(const std::vector<T>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " must be non-empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument(std::string(name) + " must be strictly increasing");
}

bool is_simulation(Experiment e) { return e == Experiment::StronglyConvexReuse; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ResultRow base_row(const ExperimentConfig& config, std::int64_t k, double n) {
  ResultRow row;
  row.experiment = to_string(config.experiment);
  row.k = k;
  row.n = n;
  return row;
}

void fill_reuse(ResultRow& row, const ReusePoint& p) {
  row.eta_star = p.eta_star;
  row.risk_star = p.risk_star;
  row.risk_std_error = p.risk_std_error;
  row.n_prime = p.n_prime;
  row.e_value = p.e_value;
  row.e_lower = p.e_lower;
  row.e_upper = p.e_upper;
}

// Emits rows to the sink in index order as soon as every earlier row is done.
class OrderedSink {
 public:
  OrderedSink(std::vector<std::optional<ResultRow>>& slots, const RowSink& sink) : slots_(slots), sink_(sink) {}

  void complete(std::size_t index, ResultRow row) {
    std::lock_guard lock(mutex_);
    slots_[index] = std::move(row);
    while (next_ < slots_.size() && slots_[next_]) {
      if (sink_) sink_(*slots_[next_]);
      ++next_;
    }
  }

 private:
  std::vector<std::optional<ResultRow>>& slots_;
  const RowSink& sink_;
  std::mutex mutex_;
  std::size_t next_ = 0;
};

struct Cell {
  std::int64_t k;
  double n;
};

std::vector<Cell> cells_of(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (std::int64_t k : config.k_grid)
    for (double n : config.n_grid) cells.push_back({k, n});
  return cells;
}

ZipfReuseOptions zipf_options(const ExperimentConfig& config) {
  ZipfReuseOptions options;
  options.search.eta_lo = config.eta_search.eta_lo;
  options.search.eta_hi = config.eta_search.eta_hi;
  options.search.grid_points = config.eta_search.grid_points;
  options.search.refine_iters = config.eta_search.refine_iters;
  options.log_tolerance = config.eta_search.log_tolerance;
  return options;
}

SimulationParams simulation_params(const ExperimentConfig& config) {
  SimulationParams params;
  if (!config.eta_search.c_grid.empty()) params.c_grid = config.eta_search.c_grid;
  params.replicas = config.replicas;
  params.base_seed = config.base_seed;
  params.eta_max = config.eta_search.eta_hi;
  params.monte_carlo.threads = config.threads;
  return params;
}

std::vector<ResultRow> run_closed_form_cells(const ExperimentConfig& config, const RowSink& sink) {
  const auto cells = cells_of(config);
  std::vector<std::optional<ResultRow>> slots(cells.size());
  OrderedSink ordered(slots, sink);
  const ZipfModel model = zipf_model_for(config);
  const ZipfReuseOptions options = zipf_options(config);

  parallel_for(cells.size(), config.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const Cell cell = cells[i];
    ResultRow row = base_row(config, cell.k, cell.n);
    try {
      switch (config.experiment) {
        case Experiment::OracleCheck: {
          const double closed = zipf_risk(model, cell.k, cell.n, config.oracle_eta);
          const double exact =
              zipf_risk_by_enumeration(model, cell.k, static_cast<int>(std::lround(cell.n)), config.oracle_eta);
          row.eta_star = config.oracle_eta;
          row.risk_star = closed;
          row.oracle_abs_diff = std::abs(closed - exact);
          if (!(*row.oracle_abs_diff <= kOracleTolerance)) row.error = "oracle_mismatch";
          break;
        }
        case Experiment::BaselineCompare: {
          fill_reuse(row, effective_reuse_zipf(model, cell.k, cell.n, options));
          row.baseline_e_value = muennighoff_effective_n(cell.k, cell.n, config.r_star) / cell.n;
          break;
        }
        default:
          fill_reuse(row, effective_reuse_zipf(model, cell.k, cell.n, options));
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (config.record_wall_time) row.wall_time_seconds = seconds_since(start);
    ordered.complete(i, std::move(row));
  });

  std::vector<ResultRow> rows;
  for (auto& slot : slots) rows.push_back(std::move(*slot));
  return rows;
}

std::vector<ResultRow> run_simulated_cells(const ExperimentConfig& config, const RowSink& sink) {
  const Problem problem = problem_for(config);
  const SimulationParams params = simulation_params(config);
  const auto cells = cells_of(config);

  struct Target {
    std::optional<SimulatedOptimum> optimum;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<Target> targets(cells.size());
  double lowest_target = std::numeric_limits<double>::infinity();
  double largest_steps = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto n = static_cast<std::int64_t>(std::llround(cells[i].n));
      targets[i].optimum = optimal_risk_simulated(problem, cells[i].k, n, params);
      const auto& r = targets[i].optimum->risk;
      lowest_target = std::min(lowest_target, r.mean - 2.0 * r.std_error);
      largest_steps = std::max(largest_steps, static_cast<double>(cells[i].k) * cells[i].n);
    } catch (const std::exception& e) {
      targets[i].error = e.what();
    }
    targets[i].seconds = seconds_since(start);
  }

  // Tabulate the one-pass curve upward from below the smallest N until it
  // passes under every target (or reaches 1.5 x the largest K N).
  OnePassCurve curve;
  std::string curve_error;
  if (largest_steps > 0.0) {
    try {
      const double lo = std::max(2.0, std::floor(config.n_grid.front() / 2.0));
      const double hi = std::max(lo, 1.5 * largest_steps);
      const auto grid = steps_grid(lo, hi, config.eta_search.curve_points_per_decade, config.n_grid);
      for (double t : grid) {
        const auto opt = optimal_risk_simulated(problem, 1, static_cast<std::int64_t>(t), params);
        curve.push_back(CurvePoint{t, opt.risk, opt.eta_star});
        if (curve.size() >= 2 && opt.risk.mean + 2.0 * opt.risk.std_error < lowest_target) break;
      }
    } catch (const std::exception& e) {
      curve_error = std::string("one-pass curve: ") + e.what();
    }
  }

  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row = base_row(config, cells[i].k, cells[i].n);
    if (!targets[i].optimum) {
      row.error = targets[i].error;
    } else {
      const auto& opt = *targets[i].optimum;
      row.eta_star = opt.eta_star;
      row.risk_star = opt.risk.mean;
      row.risk_std_error = opt.risk.std_error;
      if (!curve_error.empty()) {
        row.error = curve_error;
      } else {
        try {
          fill_reuse(row, effective_reuse_simulated(cells[i].k, static_cast<std::int64_t>(std::llround(cells[i].n)),
                                                    opt, curve));
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
    }
    if (config.record_wall_time) row.wall_time_seconds = targets[i].seconds + seconds_since(start);
    if (sink) sink(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> parse_optional_real(std::string_view field) {
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument("malformed real in CSV: '" + std::string(field) + "'");
  return value;
}

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

// Splits RFC-4180 text into records of fields.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double log_multinomial(int n, std::span<const int> counts) {
  double out = std::lgamma(n + 1.0);
  for (int c : counts) out -= std::lgamma(c + 1.0);
  return out;
}

double int_power(double base, std::int64_t exponent) {
  double out = 1.0;
  for (std::int64_t i = 0; i < exponent; ++i) out *= base;
  return out;
}

void enumerate_counts(std::size_t index, int remaining, std::vector<int>& counts,
                      const std::function<void(const std::vector<int>&)>& visit) {
  if (index + 1 == counts.size()) {
    counts[index] = remaining;
    visit(counts);
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    counts[index] = c;
    enumerate_counts(index + 1, remaining - c, counts, visit);
  }
}

}  // namespace

std::string to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::StronglyConvexReuse:
      return "strongly_convex_reuse";
    case Experiment::ZipfPowerReuse:
      return "zipf_power_reuse";
    case Experiment::ZipfLogReuse:
      return "zipf_log_reuse";
    case Experiment::OracleCheck:
      return "oracle_check";
    case Experiment::BaselineCompare:
      return "baseline_compare";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (auto e : {Experiment::StronglyConvexReuse, Experiment::ZipfPowerReuse, Experiment::ZipfLogReuse,
                 Experiment::OracleCheck, Experiment::BaselineCompare})
    if (to_string(e) == name) return e;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  require_increasing(k_grid, "K_grid");
  require_increasing(n_grid, "N_grid");
  if (k_grid.front() < 1) throw std::invalid_argument("K_grid entries must be >= 1");
  if (!(n_grid.front() > 0.0)) throw std::invalid_argument("N_grid entries must be positive");
  if (is_simulation(experiment) && replicas < 2)
    throw std::invalid_argument("simulation experiments need replicas >= 2");
  if (experiment == Experiment::OracleCheck) {
    for (double n : n_grid)
      if (n != std::round(n)) throw std::invalid_argument("oracle_check needs integer N");
  }
  if (eta_search.grid_points < 8) throw std::invalid_argument("eta_search.grid_points must be >= 8");
  if (eta_search.curve_points_per_decade < 1)
    throw std::invalid_argument("eta_search.curve_points_per_decade must be >= 1");
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    c.experiment = experiment_from_string(doc.at("experiment").get<std::string>());
    if (doc.contains("problem")) {
      const auto& p = doc.at("problem");
      c.dimension = p.value("d", c.dimension);
      c.sigma = p.value("sigma", c.sigma);
      c.problem_seed = p.value("seed", c.problem_seed);
    }
    if (doc.contains("model")) c.model = doc.at("model");
    c.k_grid = doc.value("K_grid", c.k_grid);
    c.n_grid = doc.value("N_grid", c.n_grid);
    c.replicas = doc.value("replicas", c.replicas);
    c.base_seed = doc.value("base_seed", c.base_seed);
    if (doc.contains("eta_search")) {
      const auto& s = doc.at("eta_search");
      auto& e = c.eta_search;
      e.grid_points = s.value("grid_points", e.grid_points);
      e.refine_iters = s.value("refine_iters", e.refine_iters);
      e.eta_lo = s.value("eta_lo", e.eta_lo);
      e.eta_hi = s.value("eta_hi", e.eta_hi);
      e.c_grid = s.value("c_grid", e.c_grid);
      e.curve_points_per_decade = s.value("curve_points_per_decade", e.curve_points_per_decade);
      e.log_tolerance = s.value("log_tolerance", e.log_tolerance);
    }
    if (doc.contains("eta") && !doc.at("eta").is_null()) c.eta = doc.at("eta").get<double>();
    c.r_star = doc.value("r_star", c.r_star);
    c.oracle_eta = doc.value("oracle_eta", c.oracle_eta);
    c.record_wall_time = doc.value("record_wall_time", c.record_wall_time);
    c.output_path = doc.value("output_path", c.output_path);
    c.plot_path = doc.value("plot_path", c.plot_path);
    c.figure = doc.value("figure", c.figure);
    c.threads = doc.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json doc{{"experiment", to_string(c.experiment)},
           {"problem", {{"d", c.dimension}, {"sigma", c.sigma}, {"seed", c.problem_seed}}},
           {"K_grid", c.k_grid},
           {"N_grid", c.n_grid},
           {"replicas", c.replicas},
           {"base_seed", c.base_seed},
           {"eta_search",
            {{"grid_points", c.eta_search.grid_points},
             {"refine_iters", c.eta_search.refine_iters},
             {"eta_lo", c.eta_search.eta_lo},
             {"eta_hi", c.eta_search.eta_hi},
             {"c_grid", c.eta_search.c_grid},
             {"curve_points_per_decade", c.eta_search.curve_points_per_decade},
             {"log_tolerance", c.eta_search.log_tolerance}}},
           {"r_star", c.r_star},
           {"oracle_eta", c.oracle_eta},
           {"record_wall_time", c.record_wall_time},
           {"output_path", c.output_path},
           {"plot_path", c.plot_path},
           {"figure", c.figure},
           {"threads", c.threads}};
  if (!c.model.is_null()) doc["model"] = c.model;
  if (c.eta) doc["eta"] = *c.eta;
  return doc;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("override must look like key=value: '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw std::invalid_argument("empty path component in override key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ZipfModel zipf_model_for(const ExperimentConfig& config) {
  if (!config.model.is_null()) return zipf_model_from_json(config.model);
  switch (config.experiment) {
    case Experiment::ZipfLogReuse:
      return make_zipf(ZipfLaw::LogPower, 1.5, 2.0, 10000);
    case Experiment::OracleCheck:
      return ZipfModel({2.0 / 3.0, 1.0 / 3.0}, {1.0, 0.5});
    default:
      return make_zipf(ZipfLaw::Power, 4.5, 1.0, 10000);
  }
}

Problem problem_for(const ExperimentConfig& config) {
  return make_gaussian_isotropic(config.dimension, config.sigma, config.problem_seed);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RowSink& sink) {
  config.validate();
  if (is_simulation(config.experiment)) return run_simulated_cells(config, sink);
  return run_closed_form_cells(config, sink);
}

std::string format_real(double value) {
  std::array<char, 64> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("failed to format real");
  return std::string(buffer.data(), ptr);
}

std::span<const std::string_view> csv_columns() {
  static constexpr std::array<std::string_view, 14> kColumns = {
      "experiment", "K",       "N",       "eta_star",         "risk_star",       "risk_std_error",    "n_prime",
      "e_value",    "e_lower", "e_upper", "baseline_e_value", "oracle_abs_diff", "wall_time_seconds", "error"};
  return kColumns;
}

std::string csv_header() {
  std::string out;
  for (auto name : csv_columns()) {
    if (!out.empty()) out += ',';
    out += name;
  }
  return out;
}

std::string csv_line(const ResultRow& row) {
  const std::array<std::string, 14> fields = {quote_field(row.experiment),
                                              std::to_string(row.k),
                                              format_real(row.n),
                                              optional_real(row.eta_star),
                                              optional_real(row.risk_star),
                                              optional_real(row.risk_std_error),
                                              optional_real(row.n_prime),
                                              optional_real(row.e_value),
                                              optional_real(row.e_lower),
                                              optional_real(row.e_upper),
                                              optional_real(row.baseline_e_value),
                                              optional_real(row.oracle_abs_diff),
                                              optional_real(row.wall_time_seconds),
                                              quote_field(row.error)};
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows to write");
  std::string text = csv_header() + "\r\n";
  for (const auto& row : rows) text += csv_line(row) + "\r\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<ResultRow> parse_csv_text(std::string_view text) {
  const auto records = split_csv(text);
  if (records.empty()) throw std::invalid_argument("CSV has no header");
  const auto columns = csv_columns();
  if (records.front().size() != columns.size() ||
      !std::equal(columns.begin(), columns.end(), records.front().begin()))
    throw std::invalid_argument("CSV header does not match the result-row columns");
  std::vector<ResultRow> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r];
    if (f.size() != columns.size()) throw std::invalid_argument("CSV record " + std::to_string(r) + " has wrong arity");
    ResultRow row;
    row.experiment = f[0];
    row.k = std::stoll(f[1]);
    row.n = parse_optional_real(f[2]).value();
    row.eta_star = parse_optional_real(f[3]);
    row.risk_star = parse_optional_real(f[4]);
    row.risk_std_error = parse_optional_real(f[5]);
    row.n_prime = parse_optional_real(f[6]);
    row.e_value = parse_optional_real(f[7]);
    row.e_lower = parse_optional_real(f[8]);
    row.e_upper = parse_optional_real(f[9]);
    row.baseline_e_value = parse_optional_real(f[10]);
    row.oracle_abs_diff = parse_optional_real(f[11]);
    row.wall_time_seconds = parse_optional_real(f[12]);
    row.error = f[13];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_text(buffer.str());
}

Figure figure_from_string(const std::string& name) {
  if (name == "reuse_vs_log_n") return Figure::ReuseVsLogN;
  if (name == "reuse_vs_k") return Figure::ReuseVsK;
  throw std::invalid_argument("unknown figure '" + name + "'");
}

std::string to_string(Figure figure) { return figure == Figure::ReuseVsLogN ? "reuse_vs_log_n" : "reuse_vs_k"; }

json plotdata(std::span<const ResultRow> rows, Figure figure) {
  // Series keyed by K (x = log N) or by N (x = K), in ascending key order.
  std::map<double, json> series;
  for (const auto& row : rows) {
    if (!row.e_value || !row.error.empty()) continue;
    const double key = figure == Figure::ReuseVsLogN ? static_cast<double>(row.k) : row.n;
    const double x = figure == Figure::ReuseVsLogN ? std::log(row.n) : static_cast<double>(row.k);
    json point{{"x", x}, {"y", *row.e_value}};
    if (row.e_lower) point["lower"] = *row.e_lower;
    if (row.e_upper) point["upper"] = *row.e_upper;
    auto& s = series[key];
    if (s.is_null()) {
      s = figure == Figure::ReuseVsLogN ? json{{"K", row.k}} : json{{"N", row.n}};
      s["points"] = json::array();
    }
    s["points"].push_back(std::move(point));
  }
  json out{{"figure", to_string(figure)},
           {"x_label", figure == Figure::ReuseVsLogN ? "log N" : "K"},
           {"y_label", "E(K,N)"},
           {"series", json::array()}};
  for (auto& [key, s] : series) out["series"].push_back(std::move(s));
  return out;
}

void emit_plotdata(std::span<const ResultRow> rows, Figure figure, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("emit_plotdata: no rows to write");
  const std::string text = plotdata(rows, figure).dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

double zipf_risk_by_enumeration(const ZipfModel& model, std::int64_t epochs, int n, double eta) {
  if (n < 0) throw std::invalid_argument("enumeration needs N >= 0");
  const auto p = model.probabilities();
  const auto scales = model.scales();
  std::vector<int> counts(model.dimension(), 0);
  double total = 0.0;
  enumerate_counts(0, n, counts, [&](const std::vector<int>& c) {
    double log_prob = log_multinomial(n, c);
    for (std::size_t i = 0; i < c.size(); ++i) log_prob += c[i] * std::log(p[i]);
    double risk = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double q = 1.0 - eta * scales[i];
      risk += p[i] * scales[i] * int_power(q * q, epochs * c[i]);
    }
    total += std::exp(log_prob) * 0.5 * risk;
  });
  return total;
}

OracleReport oracle_sweep(std::uint64_t seed, int models_per_shape) {
  OracleReport report;
  auto engine = rng::engine(seed, rng::Stream::Data);
  boost::random::uniform_real_distribution<double> unit(0.05, 1.0);
  for (std::size_t d = 1; d <= 3; ++d) {
    for (int m = 0; m < models_per_shape; ++m) {
      std::vector<double> p(d);
      std::vector<double> scales(d);
      double sum = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = unit(engine);
        sum += p[i];
        scales[i] = unit(engine);
      }
      for (double& v : p) v /= sum;
      std::sort(scales.begin(), scales.end(), std::greater<>());
      const ZipfModel model(p, scales);
      for (int n = 1; n <= 4; ++n)
        for (std::int64_t k = 1; k <= 3; ++k)
          for (double eta : {0.1, 0.5, 1.0}) {
            const double diff = std::abs(zipf_risk(model, k, n, eta) - zipf_risk_by_enumeration(model, k, n, eta));
            report.max_abs_diff = std::max(report.max_abs_diff, diff);
            ++report.cases;
          }
    }
  }
  return report;
}

}  // namespace reuse_lab
