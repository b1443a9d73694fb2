#pragma once

// Reference implementations used only by the tests. They are written for
// clarity rather than speed and share no code with the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

// Average of 1/2 sum_i p_i L_i (1 - eta L_i)^{2K n_i} over every one of the
// d^N index sequences, each weighted by the product of its probabilities.
inline double zipf_risk_enumerated(const std::vector<double>& p, const std::vector<double>& scales, int epochs,
                                   int n, double eta) {
  const std::size_t d = p.size();
  std::vector<std::size_t> seq(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    std::vector<int> counts(d, 0);
    for (auto s : seq) {
      weight *= p[s];
      ++counts[s];
    }
    double risk = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double factor = 1.0;
      for (int step = 0; step < 2 * epochs * counts[i]; ++step) factor *= 1.0 - eta * scales[i];
      risk += 0.5 * p[i] * scales[i] * factor;
    }
    total += weight * risk;
    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == d) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return total;
}

inline double quadratic_risk(const std::vector<double>& lambda, const std::vector<double>& w,
                             const std::vector<double>& w_star) {
  double r = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) r += lambda[i] * (w[i] - w_star[i]) * (w[i] - w_star[i]);
  return 0.5 * r;
}

// Three sums written term by term with std::pow.
struct ApproxTerms {
  double r1, r2, r3;
};

inline ApproxTerms approx_risk_direct(const std::vector<double>& lambda, const std::vector<double>& theta0,
                                      double sigma, int epochs, int n, double eta) {
  ApproxTerms t{0.0, 0.0, 0.0};
  const double kn = static_cast<double>(epochs) * n;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double q = 1.0 - eta * lambda[i];
    t.r1 += 0.5 * lambda[i] * theta0[i] * theta0[i] * std::pow(q, 2.0 * kn);
    t.r2 += (1.0 - std::pow(q, kn)) * (std::pow(q, n) - std::pow(q, kn)) / (1.0 + std::pow(q, n));
    t.r3 += lambda[i] * (1.0 - std::pow(q, 2.0 * kn)) / (2.0 - eta * lambda[i]);
  }
  t.r2 *= sigma * sigma / n;
  t.r3 *= eta * sigma * sigma / 2.0;
  return t;
}

inline double muennighoff_series(int epochs, double n, double r_star) {
  // R*(1 - e^{-x/R*}) = sum_{j>=1} (-1)^{j+1} x^j / (j! R*^{j-1})
  const double x = epochs - 1.0;
  double term = x;
  double sum = 0.0;
  for (int j = 1; j < 200; ++j) {
    sum += term;
    term *= -x / ((j + 1) * r_star);
  }
  return (1.0 + sum) * n;
}

// Plain SGD on explicit rows.
inline std::vector<double> sgd_plain(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                                     const std::vector<std::vector<std::size_t>>& orders, double eta,
                                     std::vector<double> w) {
  for (const auto& order : orders)
    for (auto j : order) {
      double pred = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) pred += xs[j][i] * w[i];
      const double residual = pred - ys[j];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * residual * xs[j][i];
    }
  return w;
}

// Ordinary least squares of y on x, returning (intercept, slope).
inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - slope * sx) / n, slope};
}

}  // namespace oracle
