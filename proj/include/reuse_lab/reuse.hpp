#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reuse_lab/model.hpp"
#include "reuse_lab/sgd_sim.hpp"

namespace reuse_lab {

/// Result of minimising a risk curve over the learning rate.
struct OptimalRisk {
  double eta_star = 0.0;
  double risk_star = 0.0;
  std::vector<std::pair<double, double>> search_trace;  // (eta, risk) in evaluation order
  bool at_boundary = false;                              // eta_star is lo or hi
};

/// Log-spaced grid scan over [lo, hi] followed by golden-section refinement
/// (in log eta) around the best grid cell. Non-finite values are skipped.
OptimalRisk minimize_risk(const std::function<double(double)>& risk_fn, double lo, double hi,
                          int grid_points = 64, int refine_iters = 60);

struct ZipfSearch {
  double eta_lo = 1e-6;
  /// 0 means (2 - 1e-6) / Lambda_1.
  double eta_hi = 0.0;
  int grid_points = 64;
  int refine_iters = 60;
};

/// min over eta of zipf_risk(model, K, N, eta).
OptimalRisk risk_star_zipf(const ZipfModel& model, std::int64_t epochs, double n, const ZipfSearch& search = {});

enum class ReuseMethod { ClosedFormZipf, SimulatedStronglyConvex };

std::string to_string(ReuseMethod method);

/// E(K, N) = N'/N with N' the one-pass size matching the K-epoch optimal risk.
struct ReusePoint {
  std::int64_t epochs = 1;
  double n = 0.0;
  double n_prime = 0.0;
  double e_value = 0.0;
  ReuseMethod method = ReuseMethod::ClosedFormZipf;
  double eta_star = 0.0;
  double risk_star = 0.0;
  std::optional<double> risk_std_error;
  /// Simulation only: e-values at target -/+ one combined standard error.
  std::optional<double> e_lower;
  std::optional<double> e_upper;
};

struct ZipfReuseOptions {
  ZipfSearch search;
  /// Bracket width in log N' at which bisection stops.
  double log_tolerance = 1e-4;
  /// Largest N' the one-pass curve is followed to before giving up.
  double n_prime_cap = 1e15;
};

/// Bisection in log N' on the strictly decreasing one-pass curve
/// g(N') = R*(1, N') for the smallest N' with g(N') <= R*(K, N).
ReusePoint effective_reuse_zipf(const ZipfModel& model, std::int64_t epochs, double n,
                                const ZipfReuseOptions& options = {});

/// Simulation protocol: eta = c log(T) / T over a grid of c, T = K N.
struct SimulationParams {
  std::vector<double> c_grid = default_c_grid();
  std::int64_t replicas = 500;
  std::uint64_t base_seed = 0;
  /// Upper bound on eta; 0 means the problem's 1/D^2.
  double eta_max = 0.0;
  MonteCarloOptions monte_carlo;

  static std::vector<double> default_c_grid();
};

struct SimulatedOptimum {
  double eta_star = 0.0;
  double c_star = 0.0;
  RiskEstimate risk;
  std::vector<std::pair<double, RiskEstimate>> trace;  // (eta, estimate) per distinct eta
  bool at_boundary = false;
};

/// Distinct learning rates c log(T)/T for the c grid, capped at the stability bound.
std::vector<double> lr_grid(const Problem& problem, double steps, const SimulationParams& params);

SimulatedOptimum optimal_risk_simulated(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                        const SimulationParams& params);

struct CurvePoint {
  double steps = 0.0;
  RiskEstimate risk;
  double eta_star = 0.0;
};

using OnePassCurve = std::vector<CurvePoint>;

/// Integer step counts, `per_decade` log-spaced points per decade over [lo, hi],
/// merged with `extra` and deduplicated.
std::vector<double> steps_grid(double lo, double hi, int per_decade, std::span<const double> extra = {});

/// Optimal-eta one-pass risks at each step count (common random numbers across T).
OnePassCurve tabulate_one_pass_curve(const Problem& problem, std::span<const double> steps,
                                     const SimulationParams& params);

/// Pool-adjacent-violators fit of a non-increasing sequence (equal weights).
std::vector<double> isotonic_non_increasing(std::span<const double> values);

/// Smallest T with curve(T) <= target under monotone piecewise log-linear
/// interpolation of the isotonic-regularised curve. Throws if the target lies
/// outside the curve's range.
double invert_one_pass_curve(const OnePassCurve& curve, double target);

/// E(K, N) from simulation against a tabulated one-pass curve.
ReusePoint effective_reuse_simulated(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                     const OnePassCurve& curve, const SimulationParams& params);

/// Same, reusing an already computed K-epoch optimum.
ReusePoint effective_reuse_simulated(std::int64_t epochs, std::int64_t n, const SimulatedOptimum& optimum,
                                     const OnePassCurve& curve);

enum class FitTransform { XPower, LogXPower };

/// y = c1 x^c2 (XPower) or y = c1 (log x)^c2 (LogXPower), by least squares in log space.
struct PowerFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
};

PowerFit fit_power_law(std::span<const std::pair<double, double>> points, FitTransform transform);

/// Strongly convex plateau (tr(H) / (4 lambda_d d)) log N.
double predicted_plateau(const Problem& problem, double n);

/// Plateau rate without constant: N^{b/(a-b)} (power law) or log^b N (log power law).
double predicted_plateau(const ZipfModel& model, double n);

/// b/(a-b) for the power law, b for the log power law.
double plateau_exponent(const ZipfModel& model);

}  // namespace reuse_lab
