#include "reuse_lab/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace reuse_lab {

namespace {

constexpr double kLogFloor = 1e-300;

// base^m for base in [0, 1], computed as exp(m log base).
inline double power(double base, double m) {
  if (m == 0.0) return 1.0;
  return std::exp(m * std::log(base < kLogFloor ? kLogFloor : base));
}

void check_shape(std::int64_t epochs, std::int64_t n) {
  if (epochs < 1) throw DomainError("epochs K must be >= 1");
  if (n < 1) throw DomainError("dataset size N must be >= 1");
}

}  // namespace

RiskBreakdown approx_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta) {
  check_shape(epochs, n);
  const auto& spectrum = problem.spectrum();
  if (!(eta > 0.0) || !(eta * spectrum.largest() < 1.0))
    throw DomainError("approx_risk requires 0 < eta < 1/lambda_1 (eta = " + std::to_string(eta) + ")");

  const double big_n = static_cast<double>(n);
  const double steps = static_cast<double>(epochs) * big_n;
  const double sigma_sq = problem.noise_std() * problem.noise_std();
  const auto lambda = spectrum.eigenvalues();
  const auto theta0 = problem.initial_error();

  RiskBreakdown out;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double q = 1.0 - eta * lambda[i];
    const double q_n = power(q, big_n);
    const double q_t = power(q, steps);
    const double q_2t = power(q, 2.0 * steps);
    out.bias += 0.5 * theta0[i] * theta0[i] * lambda[i] * q_2t;
    out.var_across_epochs += (1.0 - q_t) * (q_n - q_t) / (1.0 + q_n);
    out.var_within_epoch += lambda[i] * (1.0 - q_2t) / (2.0 - eta * lambda[i]);
  }
  out.var_across_epochs *= sigma_sq / big_n;
  out.var_within_epoch *= 0.5 * eta * sigma_sq;
  out.total = out.bias + out.var_across_epochs + out.var_within_epoch;
  return out;
}

double simplified_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta, Regime regime) {
  check_shape(epochs, n);
  if (!(eta >= 0.0)) throw DomainError("simplified_risk requires eta >= 0");
  const auto& spectrum = problem.spectrum();
  const double steps = static_cast<double>(epochs) * static_cast<double>(n);
  const double sigma_sq = problem.noise_std() * problem.noise_std();
  const double lambda_d = spectrum.smallest();
  double m = 0.5 * problem.bottom_error_mass() * lambda_d * std::exp(-2.0 * lambda_d * eta * steps) +
             eta * spectrum.trace() * sigma_sq / 4.0;
  if (regime == Regime::LargeK)
    m += sigma_sq * static_cast<double>(problem.dimension()) / (2.0 * static_cast<double>(n));
  return m;
}

LearningRate optimal_lr(const Problem& problem, std::int64_t epochs, std::int64_t n) {
  check_shape(epochs, n);
  const double sigma = problem.noise_std();
  if (!(sigma > 0.0))
    throw DomainError("optimal_lr is undefined for sigma = 0; minimise the bias alone with the largest stable eta");
  const auto& spectrum = problem.spectrum();
  const double lambda_d = spectrum.smallest();
  const double steps = static_cast<double>(epochs) * static_cast<double>(n);
  const double rho = 4.0 * problem.bottom_error_mass() * lambda_d / (spectrum.trace() * sigma * sigma);
  if (!(rho * steps > 1.0)) throw DomainError("optimal_lr requires rho K N > 1");
  LearningRate out;
  out.eta = std::log(rho * steps) / (2.0 * lambda_d * steps);
  out.exceeds_stability = out.eta > problem.stable_lr_bound();
  return out;
}

double zipf_risk(const ZipfModel& model, std::int64_t epochs, double n, double eta) {
  if (epochs < 1) throw DomainError("epochs K must be >= 1");
  if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("dataset size N must be finite and non-negative");
  if (!(eta >= 0.0) || !(eta * model.largest_scale() < 2.0))
    throw DomainError("zipf_risk requires 0 <= eta < 2/Lambda_1 (eta = " + std::to_string(eta) + ")");
  const auto p = model.probabilities();
  const auto scales = model.scales();
  const double two_k = 2.0 * static_cast<double>(epochs);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // |1 - eta Lambda| < 1; the even power makes the sign irrelevant.
    const double step = eta * scales[i];
    const double log_abs = step < 1.0 ? std::log1p(-step) : std::log(std::max(std::abs(1.0 - step), kLogFloor));
    // 1 - (1 - eta Lambda)^{2K}, then log(1 - p (...)) via log1p: both stay
    // accurate when eta Lambda_i or p_i is tiny.
    const double shrink = p[i] * -std::expm1(two_k * log_abs);
    double factor = 1.0;
    if (n > 0.0) {
      const double log_base = shrink >= 1.0 ? std::log(kLogFloor) : std::max(std::log1p(-shrink), std::log(kLogFloor));
      factor = std::exp(n * log_base);
    }
    sum += p[i] * scales[i] * factor;
  }
  return 0.5 * sum;
}

double muennighoff_effective_n(std::int64_t epochs, double n, double r_star) {
  if (epochs < 1) throw DomainError("epochs K must be >= 1");
  if (!(r_star > 0.0)) throw DomainError("R* must be positive");
  const double k_minus_1 = static_cast<double>(epochs - 1);
  return (1.0 - r_star * std::expm1(-k_minus_1 / r_star)) * n;
}

}  // namespace reuse_lab
