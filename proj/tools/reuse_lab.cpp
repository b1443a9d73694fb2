// reuse-lab: command-line front end for the multi-epoch SGD reuse experiments.
//
//   reuse-lab <subcommand> --config <path> [--set key=value ...]
//
// Exit codes: 0 success, 2 some cells failed, 1 fatal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reuse_lab/closed_form.hpp"
#include "reuse_lab/harness.hpp"
#include "reuse_lab/reuse.hpp"
#include "reuse_lab/serialize.hpp"
#include "reuse_lab/sgd_sim.hpp"

namespace {

using nlohmann::json;
using namespace reuse_lab;

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

json load_document(const CommonArgs& args, const std::string& default_experiment) {
  json doc = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw std::runtime_error("cannot open config '" + args.config_path + "'");
    doc = json::parse(in);
  }
  if (!doc.contains("experiment")) doc["experiment"] = default_experiment;
  for (const auto& assignment : args.overrides) apply_override(doc, assignment);
  return doc;
}

bool is_zipf(const ExperimentConfig& config) { return config.experiment != Experiment::StronglyConvexReuse; }

std::int64_t first_k(const ExperimentConfig& c) {
  if (c.k_grid.empty()) throw std::invalid_argument("K_grid is empty");
  return c.k_grid.front();
}

double first_n(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw std::invalid_argument("N_grid is empty");
  return c.n_grid.front();
}

json estimate_json(const RiskEstimate& r) {
  return json{{"mean", r.mean}, {"std_error", r.std_error}, {"replicas", r.replicas}};
}

json reuse_json(const ReusePoint& p) {
  json out{{"K", p.epochs},           {"N", p.n},
           {"n_prime", p.n_prime},    {"e_value", p.e_value},
           {"method", to_string(p.method)}, {"eta_star", p.eta_star},
           {"risk_star", p.risk_star}};
  if (p.risk_std_error) out["risk_std_error"] = *p.risk_std_error;
  if (p.e_lower) out["e_lower"] = *p.e_lower;
  if (p.e_upper) out["e_upper"] = *p.e_upper;
  return out;
}

int cmd_simulate(const CommonArgs& args) {
  const auto config = config_from_json(load_document(args, "strongly_convex_reuse"));
  if (!config.eta) throw std::invalid_argument("simulate needs 'eta'");
  const std::int64_t k = first_k(config);
  const auto n = static_cast<std::int64_t>(first_n(config));
  MonteCarloOptions options;
  options.threads = config.threads;
  std::optional<Problem> problem;
  if (is_zipf(config)) {
    auto model = std::make_shared<const ZipfModel>(zipf_model_for(config));
    options.source = ZipfData{model};
    options.resample_ground_truth = true;
    problem = make_zipf_problem(*model, 0.0, config.problem_seed);
  } else {
    problem = problem_for(config);
  }
  const auto estimate = monte_carlo_risk(*problem, k, n, *config.eta, config.replicas, config.base_seed, options);
  std::cout << json{{"K", k}, {"N", n}, {"eta", *config.eta}, {"risk", estimate_json(estimate)}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_closed_form(const CommonArgs& args) {
  const auto config = config_from_json(load_document(args, "strongly_convex_reuse"));
  const std::int64_t k = first_k(config);
  json out{{"K", k}};
  if (is_zipf(config)) {
    const ZipfModel model = zipf_model_for(config);
    const double n = first_n(config);
    out["N"] = n;
    if (config.eta) out["zipf_risk"] = zipf_risk(model, k, n, *config.eta);
    const auto opt = risk_star_zipf(model, k, n);
    out["eta_star"] = opt.eta_star;
    out["risk_star"] = opt.risk_star;
  } else {
    const Problem problem = problem_for(config);
    const auto n = static_cast<std::int64_t>(first_n(config));
    out["N"] = n;
    const auto lr = optimal_lr(problem, k, n);
    const double eta = config.eta.value_or(lr.eta);
    const auto r = approx_risk(problem, k, n, eta);
    out["eta"] = eta;
    out["eta_prime"] = lr.eta;
    out["eta_prime_exceeds_stability"] = lr.exceeds_stability;
    out["approx_risk"] = {{"bias", r.bias},
                          {"var_across_epochs", r.var_across_epochs},
                          {"var_within_epoch", r.var_within_epoch},
                          {"total", r.total}};
    out["simplified_risk"] = {{"small_k", simplified_risk(problem, k, n, eta, Regime::SmallK)},
                              {"large_k", simplified_risk(problem, k, n, eta, Regime::LargeK)}};
    out["predicted_plateau"] = predicted_plateau(problem, static_cast<double>(n));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_reuse(const CommonArgs& args) {
  const auto config = config_from_json(load_document(args, "zipf_power_reuse"));
  json points = json::array();
  bool failed = false;
  for (const auto& row : run_experiment(config)) {
    json p{{"K", row.k}, {"N", row.n}};
    if (row.e_value) p["e_value"] = *row.e_value;
    if (row.n_prime) p["n_prime"] = *row.n_prime;
    if (row.eta_star) p["eta_star"] = *row.eta_star;
    if (row.risk_star) p["risk_star"] = *row.risk_star;
    if (!row.error.empty()) {
      p["error"] = row.error;
      failed = true;
    }
    points.push_back(std::move(p));
  }
  std::cout << points.dump(2) << "\n";
  return failed ? kExitPartial : kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
  const auto config = config_from_json(load_document(args, "zipf_power_reuse"));
  config.validate();
  if (config.output_path.empty()) throw std::invalid_argument("sweep needs 'output_path'");

  // Stream rows to a temporary file as they complete, then move it into place.
  const std::string partial_path = config.output_path + ".partial";
  std::ofstream partial(partial_path, std::ios::binary | std::ios::trunc);
  if (!partial) throw std::runtime_error("cannot open '" + partial_path + "' for writing");
  partial << csv_header() << "\r\n" << std::flush;
  const auto rows = run_experiment(config, [&](const ResultRow& row) {
    partial << csv_line(row) << "\r\n" << std::flush;
    std::cerr << "K=" << row.k << " N=" << format_real(row.n)
              << (row.error.empty() ? "" : " error: " + row.error) << "\n";
  });
  partial.close();
  emit_csv(rows, config.output_path);
  std::remove(partial_path.c_str());
  if (!config.plot_path.empty()) emit_plotdata(rows, figure_from_string(config.figure), config.plot_path);

  bool failed = false;
  for (const auto& row : rows) failed = failed || !row.error.empty();
  return failed ? kExitPartial : kExitOk;
}

int cmd_fit(const std::string& input, std::int64_t k, const std::string& transform_name) {
  const auto transform = transform_name == "log_x_power" ? FitTransform::LogXPower : FitTransform::XPower;
  if (transform_name != "x_power" && transform_name != "log_x_power")
    throw std::invalid_argument("transform must be x_power or log_x_power");
  std::vector<std::pair<double, double>> points;
  for (const auto& row : parse_csv(input))
    if (row.k == k && row.e_value && row.error.empty()) points.emplace_back(row.n, *row.e_value);
  const auto fit = fit_power_law(points, transform);
  std::cout << json{{"K", k}, {"points", points.size()}, {"c1", fit.c1}, {"c2", fit.c2}, {"r_squared", fit.r_squared}}
                   .dump(2)
            << "\n";
  return kExitOk;
}

int cmd_oracle_check(const CommonArgs& args) {
  const json doc = load_document(args, "oracle_check");
  const auto seed = doc.value("base_seed", std::uint64_t{0});
  const auto report = oracle_sweep(seed);
  const bool ok = report.max_abs_diff <= 1e-12;
  std::cout << json{{"cases", report.cases}, {"max_abs_diff", report.max_abs_diff}, {"pass", ok}}.dump(2) << "\n";
  return ok ? kExitOk : kExitPartial;
}

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "JSON experiment config");
  sub->add_option("--set", args.overrides, "Override a config field (dotted key=value)")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-epoch SGD data reuse laboratory"};
  app.require_subcommand(1);

  CommonArgs simulate_args, closed_args, reuse_args, sweep_args, oracle_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo excess risk of K-epoch SGD");
  add_common(simulate, simulate_args);
  auto* closed = app.add_subcommand("closed-form", "Analytic risk formulas");
  add_common(closed, closed_args);
  auto* reuse = app.add_subcommand("reuse", "Effective reuse rate E(K,N) on the K x N grid");
  add_common(reuse, reuse_args);
  auto* sweep = app.add_subcommand("sweep", "Run an experiment and write CSV (and plot data)");
  add_common(sweep, sweep_args);
  auto* oracle = app.add_subcommand("oracle-check", "Closed-form Zipf risk vs exhaustive enumeration");
  add_common(oracle, oracle_args);

  std::string fit_input;
  std::int64_t fit_k = 1;
  std::string fit_transform = "x_power";
  auto* fit = app.add_subcommand("fit", "Fit E = c1 N^c2 (or c1 (log N)^c2) to sweep output");
  fit->add_option("--input", fit_input, "CSV written by sweep")->required();
  fit->add_option("--k", fit_k, "Rows with this K are fitted")->required();
  fit->add_option("--transform", fit_transform, "x_power or log_x_power");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(simulate_args);
    if (*closed) return cmd_closed_form(closed_args);
    if (*reuse) return cmd_reuse(reuse_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*fit) return cmd_fit(fit_input, fit_k, fit_transform);
    if (*oracle) return cmd_oracle_check(oracle_args);
  } catch (const std::exception& e) {
    std::cerr << "reuse-lab: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
