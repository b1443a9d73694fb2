#include "reuse_lab/reuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reuse_lab/closed_form.hpp"

namespace reuse_lab {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

std::vector<double> log_space(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int j = 0; j < points; ++j) out[static_cast<std::size_t>(j)] = std::exp(a + (b - a) * j / (points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

OptimalRisk minimize_risk(const std::function<double(double)>& risk_fn, double lo, double hi, int grid_points,
                          int refine_iters) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("minimize_risk requires 0 < lo < hi");
  if (grid_points < 8) throw std::invalid_argument("minimize_risk requires grid_points >= 8");

  OptimalRisk out;
  out.risk_star = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double eta) {
    const double r = risk_fn(eta);
    out.search_trace.emplace_back(eta, r);
    if (std::isfinite(r) && r < out.risk_star) {
      out.risk_star = r;
      out.eta_star = eta;
    }
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  };

  const auto grid = log_space(lo, hi, grid_points);
  std::size_t best = grid.size();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double r = evaluate(grid[j]);
    if (r < best_value) {
      best_value = r;
      best = j;
    }
  }
  if (best == grid.size()) throw std::domain_error("risk function is non-finite on the whole search grid");

  // Golden section on log eta over the cell(s) adjacent to the best grid point.
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = evaluate(std::exp(x1));
  double f2 = evaluate(std::exp(x2));
  for (int it = 0; it < refine_iters && b - a > 1e-15; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = evaluate(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = evaluate(std::exp(x2));
    }
  }
  out.at_boundary = out.eta_star == lo || out.eta_star == hi;
  return out;
}

OptimalRisk risk_star_zipf(const ZipfModel& model, std::int64_t epochs, double n, const ZipfSearch& search) {
  const double limit = 2.0 / model.largest_scale();
  const double hi = search.eta_hi > 0.0 ? search.eta_hi : (2.0 - 1e-6) / model.largest_scale();
  if (!(hi < limit)) throw std::domain_error("risk_star_zipf requires eta_hi < 2/Lambda_1");
  return minimize_risk([&](double eta) { return zipf_risk(model, epochs, n, eta); }, search.eta_lo, hi,
                       search.grid_points, search.refine_iters);
}

std::string to_string(ReuseMethod method) {
  return method == ReuseMethod::ClosedFormZipf ? "closed_form_zipf" : "simulated_strongly_convex";
}

ReusePoint effective_reuse_zipf(const ZipfModel& model, std::int64_t epochs, double n,
                                const ZipfReuseOptions& options) {
  if (epochs < 1) throw std::invalid_argument("epochs K must be >= 1");
  if (!(n > 0.0)) throw std::invalid_argument("dataset size N must be positive");
  const OptimalRisk target = risk_star_zipf(model, epochs, n, options.search);
  auto one_pass = [&](double n_prime) { return risk_star_zipf(model, 1, n_prime, options.search).risk_star; };

  // Bracket [lo, hi] with g(lo) > target >= g(hi).
  double lo = n;
  double hi = n * static_cast<double>(epochs);
  constexpr double kSmallest = 1e-9;
  while (one_pass(lo) <= target.risk_star) {
    hi = lo;
    lo *= 0.5;
    if (lo < kSmallest) {
      lo = 0.0;
      break;
    }
  }
  if (lo > 0.0) {
    while (one_pass(hi) > target.risk_star) {
      lo = hi;
      hi *= 2.0;
      if (hi > options.n_prime_cap)
        throw std::runtime_error("one-pass curve exhausted: no N' <= cap reaches the K-epoch optimal risk");
    }
    while (std::log(hi / lo) > options.log_tolerance) {
      const double mid = std::sqrt(lo * hi);
      if (one_pass(mid) <= target.risk_star)
        hi = mid;
      else
        lo = mid;
    }
  }

  ReusePoint point;
  point.epochs = epochs;
  point.n = n;
  point.n_prime = hi;
  point.e_value = point.n_prime / n;
  point.method = ReuseMethod::ClosedFormZipf;
  point.eta_star = target.eta_star;
  point.risk_star = target.risk_star;
  return point;
}

std::vector<double> SimulationParams::default_c_grid() { return log_space(0.2, 3.2, 12); }

std::vector<double> lr_grid(const Problem& problem, double steps, const SimulationParams& params) {
  if (!(steps > 1.0)) throw std::invalid_argument("the c log(T)/T grid needs T > 1");
  if (params.c_grid.empty()) throw std::invalid_argument("empty c grid");
  const double cap = params.eta_max > 0.0 ? params.eta_max : problem.stable_lr_bound();
  const double scale = std::log(steps) / steps;
  std::vector<double> etas;
  for (double c : params.c_grid) etas.push_back(std::min(c * scale, cap));
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  return etas;
}

SimulatedOptimum optimal_risk_simulated(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                        const SimulationParams& params) {
  const double steps = static_cast<double>(epochs) * static_cast<double>(n);
  const auto etas = lr_grid(problem, steps, params);
  const auto estimates =
      monte_carlo_risk_sweep(problem, epochs, n, etas, params.replicas, params.base_seed, params.monte_carlo);
  SimulatedOptimum out;
  std::size_t best = etas.size();
  for (std::size_t g = 0; g < etas.size(); ++g) {
    out.trace.emplace_back(etas[g], estimates[g]);
    if (std::isfinite(estimates[g].mean) && (best == etas.size() || estimates[g].mean < estimates[best].mean))
      best = g;
  }
  if (best == etas.size()) throw std::domain_error("every learning rate in the c grid diverged");
  out.eta_star = etas[best];
  out.c_star = etas[best] * steps / std::log(steps);
  out.risk = estimates[best];
  out.at_boundary = best == 0 || best + 1 == etas.size();
  return out;
}

std::vector<double> steps_grid(double lo, double hi, int per_decade, std::span<const double> extra) {
  if (!(lo >= 2.0) || !(hi >= lo) || per_decade < 1) throw std::invalid_argument("invalid steps grid");
  std::vector<double> out;
  const double start = std::floor(std::log10(lo) * per_decade);
  for (double k = start;; k += 1.0) {
    const double t = std::round(std::pow(10.0, k / per_decade));
    if (t > hi) break;
    if (t >= lo) out.push_back(t);
  }
  out.push_back(std::round(lo));
  out.push_back(std::round(hi));
  for (double e : extra) out.push_back(std::round(e));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

OnePassCurve tabulate_one_pass_curve(const Problem& problem, std::span<const double> steps,
                                     const SimulationParams& params) {
  OnePassCurve curve;
  curve.reserve(steps.size());
  for (double t : steps) {
    const auto opt = optimal_risk_simulated(problem, 1, static_cast<std::int64_t>(t), params);
    curve.push_back(CurvePoint{t, opt.risk, opt.eta_star});
  }
  std::sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.steps < b.steps; });
  return curve;
}

std::vector<double> isotonic_non_increasing(std::span<const double> values) {
  // Blocks of (sum, count); merge while a later block exceeds an earlier one.
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (double v : values) {
    sums.push_back(v);
    counts.push_back(1);
    while (sums.size() > 1) {
      const std::size_t k = sums.size() - 1;
      if (sums[k] / counts[k] <= sums[k - 1] / counts[k - 1]) break;
      sums[k - 1] += sums[k];
      counts[k - 1] += counts[k];
      sums.pop_back();
      counts.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < sums.size(); ++k) out.insert(out.end(), counts[k], sums[k] / counts[k]);
  return out;
}

namespace {

struct RegularizedCurve {
  std::vector<double> log_steps;
  std::vector<double> log_risk;
  std::vector<double> std_error;
};

RegularizedCurve regularize(const OnePassCurve& curve) {
  if (curve.size() < 2) throw std::invalid_argument("one-pass curve needs at least two points");
  std::vector<double> means;
  RegularizedCurve out;
  for (const auto& p : curve) {
    if (!(p.risk.mean > 0.0) || !std::isfinite(p.risk.mean))
      throw std::domain_error("one-pass curve contains a non-positive or non-finite risk");
    means.push_back(p.risk.mean);
    out.log_steps.push_back(std::log(p.steps));
    out.std_error.push_back(p.risk.std_error);
  }
  for (double m : isotonic_non_increasing(means)) out.log_risk.push_back(std::log(m));
  return out;
}

// Index j and weight t in [0, 1] locating the first crossing of the target.
std::pair<std::size_t, double> locate(const RegularizedCurve& c, double log_target) {
  const auto& r = c.log_risk;
  if (log_target > r.front() || log_target < r.back())
    throw std::out_of_range("target risk lies outside the one-pass curve range");
  if (log_target == r.front()) return {0, 1.0};
  std::size_t j = 1;
  while (r[j] > log_target) ++j;
  const double t = (r[j - 1] - log_target) / (r[j - 1] - r[j]);
  return {j, t};
}

double interpolate_steps(const RegularizedCurve& c, double target) {
  const auto [j, t] = locate(c, std::log(target));
  if (j == 0) return std::exp(c.log_steps.front());
  return std::exp(c.log_steps[j - 1] + t * (c.log_steps[j] - c.log_steps[j - 1]));
}

double clamped_steps(const RegularizedCurve& c, double target) {
  const double log_target = std::log(std::max(target, std::numeric_limits<double>::min()));
  if (log_target >= c.log_risk.front()) return std::exp(c.log_steps.front());
  if (log_target <= c.log_risk.back()) return std::exp(c.log_steps.back());
  return interpolate_steps(c, target);
}

}  // namespace

double invert_one_pass_curve(const OnePassCurve& curve, double target) {
  return interpolate_steps(regularize(curve), target);
}

ReusePoint effective_reuse_simulated(std::int64_t epochs, std::int64_t n, const SimulatedOptimum& optimum,
                                     const OnePassCurve& curve) {
  const auto reg = regularize(curve);
  const double target = optimum.risk.mean;
  const auto [j, t] = locate(reg, std::log(target));
  const double curve_se = j == 0 ? reg.std_error.front() : reg.std_error[j - 1] + t * (reg.std_error[j] - reg.std_error[j - 1]);
  const double spread = std::hypot(optimum.risk.std_error, curve_se);
  const double big_n = static_cast<double>(n);

  ReusePoint point;
  point.epochs = epochs;
  point.n = big_n;
  point.n_prime = interpolate_steps(reg, target);
  point.e_value = point.n_prime / big_n;
  point.method = ReuseMethod::SimulatedStronglyConvex;
  point.eta_star = optimum.eta_star;
  point.risk_star = optimum.risk.mean;
  point.risk_std_error = optimum.risk.std_error;
  point.e_lower = clamped_steps(reg, target + spread) / big_n;
  point.e_upper = clamped_steps(reg, target - spread) / big_n;
  return point;
}

ReusePoint effective_reuse_simulated(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                     const OnePassCurve& curve, const SimulationParams& params) {
  return effective_reuse_simulated(epochs, n, optimal_risk_simulated(problem, epochs, n, params), curve);
}

PowerFit fit_power_law(std::span<const std::pair<double, double>> points, FitTransform transform) {
  if (points.size() < 3) throw std::invalid_argument("fit_power_law needs at least 3 points");
  std::vector<double> u;
  std::vector<double> v;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("fit_power_law needs positive x and y");
    double ux = std::log(x);
    if (transform == FitTransform::LogXPower) {
      if (!(ux > 0.0)) throw std::invalid_argument("log-power fit needs x > 1");
      ux = std::log(ux);
    }
    u.push_back(ux);
    v.push_back(std::log(y));
  }
  const auto n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, suv = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  if (!(suu > 0.0)) throw std::invalid_argument("fit_power_law needs at least two distinct x values");
  PowerFit fit;
  fit.c2 = suv / suu;
  fit.c1 = std::exp(mv - fit.c2 * mu);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = v[i] - (mv + fit.c2 * (u[i] - mu));
    ss_res += e * e;
  }
  fit.r_squared = svv > 0.0 ? std::clamp(1.0 - ss_res / svv, 0.0, 1.0) : 1.0;
  return fit;
}

double predicted_plateau(const Problem& problem, double n) {
  const auto& s = problem.spectrum();
  return s.trace() / (4.0 * s.smallest() * static_cast<double>(problem.dimension())) * std::log(n);
}

double plateau_exponent(const ZipfModel& model) {
  switch (model.law()) {
    case ZipfLaw::Power:
      return model.b() / (model.a() - model.b());
    case ZipfLaw::LogPower:
      return model.b();
    case ZipfLaw::Explicit:
      break;
  }
  throw std::domain_error("explicit Zipf models have no predicted plateau exponent");
}

double predicted_plateau(const ZipfModel& model, double n) {
  const double exponent = plateau_exponent(model);
  if (model.law() == ZipfLaw::Power) return std::pow(n, exponent);
  return std::pow(std::log(n), exponent);
}

}  // namespace reuse_lab
