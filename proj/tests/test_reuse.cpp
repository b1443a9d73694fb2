#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "reuse_lab/closed_form.hpp"
#include "reuse_lab/reuse.hpp"

using namespace reuse_lab;

TEST_CASE("minimize_risk on simple functions") {
  const auto quad = minimize_risk([](double x) { return (x - 0.3) * (x - 0.3); }, 0.01, 1.0);
  CHECK(std::abs(quad.eta_star - 0.3) <= 1e-6);
  CHECK_FALSE(quad.at_boundary);
  for (const auto& [eta, r] : quad.search_trace) CHECK(quad.risk_star <= r);

  const auto falling = minimize_risk([](double x) { return 1.0 / x; }, 0.01, 1.0);
  CHECK(falling.eta_star == 1.0);
  CHECK(falling.at_boundary);

  const auto rising = minimize_risk([](double x) { return x; }, 0.01, 1.0);
  CHECK(rising.eta_star == 0.01);
  CHECK(rising.at_boundary);

  const auto holes = minimize_risk([](double x) { return x > 0.5 ? NAN : (x - 0.2) * (x - 0.2); }, 0.01, 1.0);
  CHECK(std::abs(holes.eta_star - 0.2) <= 1e-6);

  CHECK_THROWS(minimize_risk([](double) { return INFINITY; }, 0.01, 1.0));
  CHECK_THROWS(minimize_risk([](double x) { return x; }, 0.0, 1.0));
  CHECK_THROWS(minimize_risk([](double x) { return x; }, 1.0, 0.5));
  CHECK_THROWS(minimize_risk([](double x) { return x; }, 0.1, 0.5, 4));
}

TEST_CASE("zipf optimum dominates random probes") {
  const auto z = make_zipf(ZipfLaw::Power, 4.5, 1.0, 10000);
  const auto opt = risk_star_zipf(z, 1, 1e4);
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int j = 0; j < 200; ++j) {
    double eta = u(gen);
    if (eta <= 0.0) continue;
    CHECK(opt.risk_star <= zipf_risk(z, 1, 1e4, eta));
  }
  CHECK(opt.eta_star > 1e-6);
  CHECK(opt.eta_star < 2.0);
}

TEST_CASE("zipf optimum properties") {
  const ZipfModel one({1.0}, {1.0});
  const auto memorize = risk_star_zipf(one, 3, 10.0);
  CHECK(memorize.eta_star == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(memorize.risk_star <= 1e-12);

  const auto z = make_zipf(ZipfLaw::Power, 4.5, 1.0, 10000);
  CHECK(risk_star_zipf(z, 2, 1e3).risk_star < risk_star_zipf(z, 1, 1e3).risk_star);
  for (int k : {1, 2, 8})
    for (double n : {100.0, 1000.0, 10000.0})
      CHECK(risk_star_zipf(z, k, n).risk_star >= risk_star_zipf(z, k, 2 * n).risk_star);

  ZipfSearch bad;
  bad.eta_hi = 2.0;
  CHECK_THROWS(risk_star_zipf(z, 1, 10.0, bad));
}

TEST_CASE("closed-form effective reuse") {
  const auto z = make_zipf(ZipfLaw::Power, 4.5, 1.0, 1000);
  for (double n : {100.0, 1000.0, 10000.0}) {
    const auto self = effective_reuse_zipf(z, 1, n);
    CHECK(std::abs(self.e_value - 1.0) <= 1e-3);

    double previous = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const auto point = effective_reuse_zipf(z, k, n);
      CHECK(point.e_value == doctest::Approx(point.n_prime / n).epsilon(1e-12));
      CHECK(point.e_value <= k * (1.0 + 1e-3));
      CHECK(point.e_value >= previous - 1e-3);
      previous = point.e_value;

      // The matched one-pass risk brackets the target within the bisection width.
      const double at = risk_star_zipf(z, 1, point.n_prime).risk_star;
      const double before = risk_star_zipf(z, 1, point.n_prime * std::exp(-1e-4)).risk_star;
      CHECK(at <= point.risk_star * (1.0 + 1e-9));
      CHECK(before >= point.risk_star * (1.0 - 1e-9));
    }
  }
  CHECK_THROWS(effective_reuse_zipf(z, 0, 10.0));
  CHECK_THROWS(effective_reuse_zipf(z, 2, 0.0));
}

TEST_CASE("power-law fits") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1.0, 3.0, 10.0, 40.0, 100.0}) pts.emplace_back(x, 2.0 * std::sqrt(x));
  const auto fit = fit_power_law(pts, FitTransform::XPower);
  CHECK(fit.c1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.c2 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> logpts;
  for (double x : {10.0, 100.0, 1e3, 1e5}) logpts.emplace_back(x, 0.7 * std::pow(std::log(x), 2.0));
  const auto logfit = fit_power_law(logpts, FitTransform::LogXPower);
  CHECK(logfit.c1 == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(logfit.c2 == doctest::Approx(2.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> noisy{{1.0, 1.0}, {2.0, 3.0}, {4.0, 3.5}, {8.0, 9.0}};
  const auto base = fit_power_law(noisy, FitTransform::XPower);
  std::vector<double> lx, ly;
  for (const auto& [x, y] : noisy) {
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const auto [intercept, slope] = oracle::ols(lx, ly);
  CHECK(base.c2 == doctest::Approx(slope).epsilon(1e-12));
  CHECK(base.c1 == doctest::Approx(std::exp(intercept)).epsilon(1e-12));
  CHECK(base.r_squared >= 0.0);
  CHECK(base.r_squared <= 1.0);

  auto scaled = noisy;
  for (auto& [x, y] : scaled) y *= 3.5;
  const auto s = fit_power_law(scaled, FitTransform::XPower);
  CHECK(s.c2 == doctest::Approx(base.c2).epsilon(1e-12));
  CHECK(s.c1 == doctest::Approx(3.5 * base.c1).epsilon(1e-12));

  const std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 2.0}};
  CHECK_THROWS(fit_power_law(two, FitTransform::XPower));
  const std::vector<std::pair<double, double>> flat{{2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}};
  CHECK_THROWS(fit_power_law(flat, FitTransform::XPower));
  const std::vector<std::pair<double, double>> neg{{1.0, 1.0}, {2.0, -2.0}, {3.0, 3.0}};
  CHECK_THROWS(fit_power_law(neg, FitTransform::XPower));
  const std::vector<std::pair<double, double>> small{{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
  CHECK_THROWS(fit_power_law(small, FitTransform::LogXPower));
}

TEST_CASE("isotonic regression") {
  const std::vector<double> a{3.0, 1.0, 2.0};
  CHECK(isotonic_non_increasing(a) == std::vector<double>{3.0, 1.5, 1.5});
  const std::vector<double> b{5.0, 4.0, 4.0, 1.0};
  CHECK(isotonic_non_increasing(b) == b);
  const std::vector<double> c{1.0, 2.0, 3.0};
  CHECK(isotonic_non_increasing(c) == std::vector<double>{2.0, 2.0, 2.0});
  const std::vector<double> d{4.0, 1.0, 3.0, 2.0, 0.5};
  const auto fit = isotonic_non_increasing(d);
  for (std::size_t i = 0; i + 1 < fit.size(); ++i) CHECK(fit[i] >= fit[i + 1]);
  CHECK(std::accumulate(fit.begin(), fit.end(), 0.0) == doctest::Approx(10.5));
}

TEST_CASE("one-pass curve inversion") {
  OnePassCurve curve;
  for (double t : {10.0, 100.0, 1000.0}) curve.push_back(CurvePoint{t, RiskEstimate{1.0 / t, 0.0, 10}, 0.0});
  CHECK(invert_one_pass_curve(curve, 0.01) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(invert_one_pass_curve(curve, 1.0 / std::sqrt(1000.0)) == doctest::Approx(std::sqrt(1000.0)).epsilon(1e-12));
  CHECK(invert_one_pass_curve(curve, 0.1) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS(invert_one_pass_curve(curve, 0.5));
  CHECK_THROWS(invert_one_pass_curve(curve, 1e-4));

  // A bump is flattened before inversion.
  curve[1].risk.mean = 0.2;
  const double t = invert_one_pass_curve(curve, 0.05);
  CHECK(t > 10.0);
  CHECK(t <= 1000.0);
}

TEST_CASE("grids") {
  const double extra[] = {333.0, 1000.0};
  const auto g = steps_grid(10.0, 1000.0, 4, extra);
  CHECK(g.front() == 10.0);
  CHECK(g.back() == 1000.0);
  CHECK(std::find(g.begin(), g.end(), 333.0) != g.end());
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] < g[i + 1]);
  CHECK(g.size() == 10);
  CHECK_THROWS(steps_grid(1.0, 10.0, 4));

  const auto p = make_gaussian_isotropic(4, 0.1, 0);
  SimulationParams params;
  params.c_grid = {0.1, 1.0, 10.0, 1e6, 1e7};
  const auto etas = lr_grid(p, 1000.0, params);
  CHECK(etas.size() == 3);  // c = 10 and above hit the 1/D^2 cap
  CHECK(etas.back() == p.stable_lr_bound());
  CHECK(std::is_sorted(etas.begin(), etas.end()));
  CHECK(SimulationParams::default_c_grid().size() == 12);
}

TEST_CASE("simulated effective reuse on a small problem") {
  const auto p = make_gaussian_isotropic(5, 0.3, 1);
  SimulationParams params;
  params.replicas = 64;
  params.base_seed = 3;
  const double extra[] = {200.0};
  const auto steps = steps_grid(50.0, 3000.0, 6, extra);
  const auto curve = tabulate_one_pass_curve(p, steps, params);
  REQUIRE(curve.size() == steps.size());

  const auto self = effective_reuse_simulated(p, 1, 200, curve, params);
  CHECK(std::abs(self.e_value - 1.0) <= 0.02);
  REQUIRE(self.e_lower);
  CHECK(*self.e_lower <= self.e_value);
  CHECK(*self.e_upper >= self.e_value);
  CHECK(self.method == ReuseMethod::SimulatedStronglyConvex);

  const auto three = effective_reuse_simulated(p, 3, 200, curve, params);
  CHECK(three.e_value > 1.0);
  CHECK(three.e_value <= 3.0 * 1.2);

  const auto optimum = optimal_risk_simulated(p, 3, 200, params);
  CHECK(effective_reuse_simulated(3, 200, optimum, curve).e_value == three.e_value);
  CHECK(optimum.trace.size() == lr_grid(p, 600.0, params).size());
}

TEST_CASE("plateau predictions") {
  const auto p = make_gaussian_isotropic(100, 0.1, 0);
  CHECK(predicted_plateau(p, 1e4) == doctest::Approx(0.25 * std::log(1e4)));
  CHECK(plateau_exponent(make_zipf(ZipfLaw::Power, 4.5, 1.0, 10)) == doctest::Approx(2.0 / 7.0));
  CHECK(plateau_exponent(make_zipf(ZipfLaw::LogPower, 1.5, 2.0, 10)) == 2.0);
  CHECK(predicted_plateau(make_zipf(ZipfLaw::LogPower, 1.5, 2.0, 10), 100.0) ==
        doctest::Approx(std::pow(std::log(100.0), 2.0)));
  CHECK_THROWS(plateau_exponent(ZipfModel({1.0}, {1.0})));
}
