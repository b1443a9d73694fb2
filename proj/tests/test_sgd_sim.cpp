#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"
#include "reuse_lab/model.hpp"
#include "reuse_lab/sgd_sim.hpp"

using namespace reuse_lab;

namespace {

std::shared_ptr<const ZipfModel> small_zipf() {
  return std::make_shared<const ZipfModel>(std::vector<double>{2.0 / 3.0, 1.0 / 3.0}, std::vector<double>{1.0, 0.5});
}

Problem diagonal_problem(double sigma) {
  return Problem(Spectrum({2.0, 1.5, 1.0, 0.5, 0.25}), {0.3, -1.0, 0.7, 2.0, -0.4}, sigma);
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("excess risk") {
  const Problem p(Spectrum({2.0}), {1.0}, 0.0);
  CHECK(excess_risk(p, std::vector<double>{4.0}) == doctest::Approx(9.0));
  CHECK(excess_risk(p, std::vector<double>{1.0}) == 0.0);

  const auto q = diagonal_problem(0.1);
  const std::vector<double> w{0.1, 0.2, -0.3, 0.4, 5.0};
  const std::vector<double> lambda(q.spectrum().eigenvalues().begin(), q.spectrum().eigenvalues().end());
  const std::vector<double> truth(q.ground_truth().begin(), q.ground_truth().end());
  CHECK(excess_risk(q, w) == doctest::Approx(oracle::quadratic_risk(lambda, w, truth)).epsilon(1e-14));
  CHECK_THROWS_AS(excess_risk(q, std::vector<double>{1.0}), ModelError);
}

TEST_CASE("zero learning rate leaves the initial weights") {
  const Problem p(Spectrum({1.0, 1.0}), {1.0, 2.0}, 0.3, {0.5, -0.5}, 3.0);
  const auto t = run_sgd(p, SgdRun{3, 10, 0.0, 4});
  CHECK(t.final_weight == std::vector<double>{0.5, -0.5});
  CHECK(t.steps_taken == 30);

  const auto est = monte_carlo_risk(p, 2, 5, 0.0, 10, 1);
  CHECK(est.mean == excess_risk(p, p.init()));
  CHECK(est.std_error == 0.0);
  CHECK(est.replicas == 10);
}

TEST_CASE("one-hot noiseless runs follow the hand recursion") {
  const auto model = small_zipf();
  const auto problem = make_zipf_problem(*model, 0.0, 2);
  const double eta = 0.7;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SgdRun run{3, 7, eta, seed};
    const auto t = run_sgd(problem, run, ZipfData{model});
    const auto data = draw_dataset(problem, ZipfData{model}, 7, seed);
    const auto theta0 = problem.initial_error();
    for (std::size_t i = 0; i < 2; ++i) {
      const auto count = std::count(data.atoms.begin(), data.atoms.end(), i);
      const double expected = theta0[i] * std::pow(1.0 - eta * model->scales()[i], 3.0 * count);
      CHECK(t.final_weight[i] - problem.ground_truth()[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("runs are deterministic") {
  const auto p = make_gaussian_isotropic(4, 0.2, 9);
  const SgdRun run{2, 3, 0.01, 77};
  const auto a = run_sgd(p, run, GaussianData{}, true);
  const auto b = run_sgd(p, run, GaussianData{}, true);
  CHECK(a.final_weight == b.final_weight);
  CHECK(*a.final_bias == *b.final_bias);
  CHECK(*a.final_var == *b.final_var);
}

TEST_CASE("streamed run equals the run on the materialised dataset") {
  const auto p = diagonal_problem(0.3);
  for (std::int64_t epochs : {1, 2, 5}) {
    const SgdRun run{epochs, 40, 0.05, 123};
    const auto streamed = run_sgd(p, run);
    const auto data = draw_dataset(p, GaussianData{}, 40, 123);
    const auto orders = draw_epoch_orders(40, static_cast<std::size_t>(epochs), 123);
    const auto explicit_run = run_sgd_on(p, data, orders, 0.05);
    CHECK(streamed.final_weight == explicit_run.final_weight);
  }
  const auto model = small_zipf();
  const auto zp = make_zipf_problem(*model, 0.5, 1);
  const auto streamed = run_sgd(zp, SgdRun{4, 9, 0.5, 8}, ZipfData{model});
  const auto data = draw_dataset(zp, ZipfData{model}, 9, 8);
  CHECK(streamed.final_weight == run_sgd_on(zp, data, draw_epoch_orders(9, 4, 8), 0.5).final_weight);
}

TEST_CASE("engine agrees with plain SGD") {
  const auto p = diagonal_problem(0.3);
  const auto data = draw_dataset(p, GaussianData{}, 30, 5);
  const auto orders = draw_epoch_orders(30, 3, 5);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < 30; ++j) {
    std::vector<double> x(&data.inputs[j * 5], &data.inputs[j * 5] + 5);
    double y = data.noise[j];
    for (std::size_t i = 0; i < 5; ++i) y += x[i] * p.ground_truth()[i];
    xs.push_back(x);
    ys.push_back(y);
  }
  const auto expected = oracle::sgd_plain(xs, ys, orders, 0.04, std::vector<double>(5, 0.0));
  const auto got = run_sgd_on(p, data, orders, 0.04).final_weight;
  for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-11));
}

TEST_CASE("epoch orders") {
  const auto orders = draw_epoch_orders(50, 4, 3);
  REQUIRE(orders.size() == 4);
  for (std::size_t j = 0; j < 50; ++j) CHECK(orders[0][j] == j);
  for (const auto& order : orders) {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < 50; ++j) CHECK(sorted[j] == j);
  }
  CHECK(orders[1] != orders[2]);
  CHECK(draw_epoch_orders(50, 4, 3) == orders);
}

TEST_CASE("bias plus variance equals the iterate") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = diagonal_problem(0.5);
    const auto t = run_sgd(p, SgdRun{3, 25, 0.08, seed}, GaussianData{}, true);
    REQUIRE(t.final_bias);
    std::vector<double> gap(5);
    std::vector<double> theta(5);
    for (std::size_t i = 0; i < 5; ++i) {
      theta[i] = t.final_weight[i] - p.ground_truth()[i];
      gap[i] = theta[i] - ((*t.final_bias)[i] + (*t.final_var)[i]);
    }
    CHECK(norm(gap) <= 1e-10 * (1.0 + norm(theta)));
  }
  const auto model = small_zipf();
  const auto zp = make_zipf_problem(*model, 0.4, 3);
  const auto t = run_sgd(zp, SgdRun{2, 11, 0.9, 6}, ZipfData{model}, true);
  for (std::size_t i = 0; i < 2; ++i) {
    const double theta = t.final_weight[i] - zp.ground_truth()[i];
    CHECK(std::abs(theta - ((*t.final_bias)[i] + (*t.final_var)[i])) <= 1e-10 * (1.0 + std::abs(theta)));
  }
}

TEST_CASE("antithetic noise cancels the variance process exactly") {
  const auto p = diagonal_problem(0.7);
  const auto data = draw_dataset(p, GaussianData{}, 20, 41);
  const auto orders = draw_epoch_orders(20, 3, 41);
  const auto plus = run_sgd_on(p, data, orders, 0.06, true);
  const auto minus = run_sgd_on(p, data.with_negated_noise(), orders, 0.06, true);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK((*plus.final_var)[i] + (*minus.final_var)[i] == 0.0);
    CHECK((*plus.final_bias)[i] == (*minus.final_bias)[i]);
  }
}

TEST_CASE("one-hot updates commute") {
  const auto model = std::make_shared<const ZipfModel>(std::vector<double>{0.4, 0.3, 0.2, 0.1},
                                                       std::vector<double>{1.0, 0.8, 0.5, 0.25});
  const auto noiseless = make_zipf_problem(*model, 0.0, 4);
  const auto noisy = make_zipf_problem(*model, 0.5, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto orders = draw_epoch_orders(30, 3, seed);
    {
      const auto data = draw_dataset(noiseless, ZipfData{model}, 30, seed);
      auto reversed = orders;
      for (auto& o : reversed) std::reverse(o.begin(), o.end());
      CHECK(run_sgd_on(noiseless, data, orders, 0.9).final_weight ==
            run_sgd_on(noiseless, data, reversed, 0.9).final_weight);
    }
    {
      // With noise, only the interleaving of different coordinates is free:
      // grouping each epoch by atom keeps every coordinate's own sequence.
      const auto data = draw_dataset(noisy, ZipfData{model}, 30, seed);
      auto grouped = orders;
      for (auto& o : grouped)
        std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
          return data.atoms[a] < data.atoms[b];
        });
      CHECK(run_sgd_on(noisy, data, orders, 0.9).final_weight == run_sgd_on(noisy, data, grouped, 0.9).final_weight);
    }
  }
}

TEST_CASE("noiseless risk does not increase with more epochs") {
  const auto p = make_gaussian_isotropic(20, 0.0, 2);
  const double eta = p.stable_lr_bound();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    double previous = excess_risk(p, p.init());
    for (std::int64_t k = 1; k <= 5; ++k) {
      const double r = excess_risk(p, run_sgd(p, SgdRun{k, 30, eta, seed}).final_weight);
      CHECK(r <= previous);
      previous = r;
    }
  }
}

TEST_CASE("divergence is reported with its step and seed") {
  const auto p = make_gaussian_isotropic(10, 0.1, 0);
  try {
    run_sgd(p, SgdRun{2, 500, 5.0, 31});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.seed() == 31);
    CHECK(e.step() > 0);
  }
  try {
    monte_carlo_risk(p, 1, 500, 5.0, 4, 9);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.seed() == replica_seed(9, 0));
  }
  const double etas[] = {0.01, 5.0};
  const auto sweep = monte_carlo_risk_sweep(p, 1, 500, etas, 4, 9);
  CHECK(std::isfinite(sweep[0].mean));
  CHECK(std::isinf(sweep[1].mean));
}

TEST_CASE("estimator statistics") {
  const double samples[] = {1.0, 2.0, 3.0, 4.0};
  const auto e = estimate_from_samples(samples);
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK_THROWS(monte_carlo_risk(make_gaussian_isotropic(2, 0.1, 0), 1, 3, 0.1, 1, 0));
}

TEST_CASE("monte carlo estimates do not depend on the thread count") {
  const auto p = make_gaussian_isotropic(8, 0.2, 1);
  MonteCarloOptions one;
  one.threads = 1;
  MonteCarloOptions three;
  three.threads = 3;
  const auto a = monte_carlo_risk(p, 2, 30, 0.01, 17, 5, one);
  const auto b = monte_carlo_risk(p, 2, 30, 0.01, 17, 5, three);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);

  const double etas[] = {0.005, 0.01};
  const auto sweep = monte_carlo_risk_sweep(p, 2, 30, etas, 17, 5, three);
  CHECK(sweep[1].mean == doctest::Approx(a.mean).epsilon(1e-14));
}

TEST_CASE("one-hot monte carlo converges to the enumerated risk") {
  const auto model = small_zipf();
  const auto problem = make_zipf_problem(*model, 0.0, 0);
  MonteCarloOptions options;
  options.source = ZipfData{model};
  options.resample_ground_truth = true;
  const auto est = monte_carlo_risk(problem, 2, 3, 0.5, 200000, 12, options);
  const double exact = oracle::zipf_risk_enumerated({2.0 / 3.0, 1.0 / 3.0}, {1.0, 0.5}, 2, 3, 0.5);
  CHECK(std::abs(est.mean - exact) <= 4.0 * est.std_error);
  CHECK(est.std_error < 0.01 * exact);
}

TEST_CASE("single-pass gaussian monte carlo matches the second-moment recursion") {
  // Sigma <- Sigma - eta (H Sigma + Sigma H) + eta^2 (2 H Sigma H + tr(H Sigma) H + sigma^2 H)
  const auto p = diagonal_problem(0.3);
  const std::size_t d = 5;
  const int n = 150;
  const double eta = 0.05;
  const auto lambda = p.spectrum().eigenvalues();
  std::vector<double> sigma(d * d);
  const auto theta0 = p.initial_error();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) sigma[i * d + j] = theta0[i] * theta0[j];
  for (int step = 0; step < n; ++step) {
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += lambda[i] * sigma[i * d + i];
    std::vector<double> next(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double s = sigma[i * d + j];
        double v = s - eta * (lambda[i] + lambda[j]) * s + eta * eta * 2.0 * lambda[i] * lambda[j] * s;
        if (i == j) v += eta * eta * (tr + 0.09) * lambda[i];
        next[i * d + j] = v;
      }
    sigma = next;
  }
  double exact = 0.0;
  for (std::size_t i = 0; i < d; ++i) exact += 0.5 * lambda[i] * sigma[i * d + i];

  const auto est = monte_carlo_risk(p, 1, n, eta, 40000, 3);
  CHECK(std::abs(est.mean - exact) <= 4.0 * est.std_error);
}
