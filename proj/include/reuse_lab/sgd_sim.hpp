#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "reuse_lab/model.hpp"

namespace reuse_lab {

/// Fresh x ~ N(0, H) for the problem's diagonal H.
struct GaussianData {};

/// Fresh one-hot x = mu_i e_i with i ~ p.
struct ZipfData {
  std::shared_ptr<const ZipfModel> model;
};

using DataSource = std::variant<GaussianData, ZipfData>;

/// Raised when the iterate leaves ||w|| <= 1e8 (1 + ||w*||) or becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t step, std::uint64_t seed);
  std::int64_t step() const noexcept { return step_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::int64_t step_;
  std::uint64_t seed_;
};

/// A materialised training set. Gaussian points are rows of `inputs`
/// (N x d, row-major); one-hot points are coordinate indices in `atoms`.
struct Dataset {
  std::size_t dimension = 0;
  std::vector<double> inputs;
  std::vector<std::uint32_t> atoms;
  std::vector<double> noise;
  std::shared_ptr<const ZipfModel> model;

  std::size_t size() const noexcept { return noise.size(); }
  bool one_hot() const noexcept { return model != nullptr; }
  Dataset with_negated_noise() const;
};

struct Trajectory {
  std::vector<double> final_weight;
  /// theta^bias and theta^var at the end of training, in error coordinates
  /// (so final_weight - w* = final_bias + final_var).
  std::optional<std::vector<double>> final_bias;
  std::optional<std::vector<double>> final_var;
  std::int64_t steps_taken = 0;
};

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t replicas = 0;
};

/// Mean and sample-std / sqrt(n) of the given per-replica risks.
RiskEstimate estimate_from_samples(std::span<const double> samples);

/// R(w) = 1/2 (w - w*)^T H (w - w*).
double excess_risk(const Problem& problem, std::span<const double> w);

/// Draws N points (and their label noise) in epoch-1 visiting order.
Dataset draw_dataset(const Problem& problem, const DataSource& source, std::size_t n, std::uint64_t seed);

/// Visiting orders for K epochs: epoch 1 is the identity (the dataset is
/// already in a uniformly random order), epochs 2..K are Fisher-Yates shuffles.
std::vector<std::vector<std::size_t>> draw_epoch_orders(std::size_t n, std::size_t epochs, std::uint64_t seed);

/// SGD over an explicit dataset and explicit per-epoch orders.
Trajectory run_sgd_on(const Problem& problem, const Dataset& data,
                      std::span<const std::vector<std::size_t>> orders, double eta,
                      bool track_decomposition = false, std::uint64_t seed_for_errors = 0);

/// K-epoch SGD with reshuffling on N fresh points drawn from `source`.
/// Bitwise identical to run_sgd_on(draw_dataset(...), draw_epoch_orders(...)).
Trajectory run_sgd(const Problem& problem, const SgdRun& run, const DataSource& source = GaussianData{},
                   bool track_decomposition = false);

/// Final excess risks of K-epoch SGD at several learning rates that share one
/// dataset and one set of permutations. Diverged rates report +infinity.
std::vector<double> final_risks(const Problem& problem, const DataSource& source, std::int64_t epochs,
                                std::int64_t n, std::span<const double> etas, std::uint64_t seed);

struct MonteCarloOptions {
  DataSource source = GaussianData{};
  /// Redraw w* ~ N(0, I) for every replica (isotropic prior).
  bool resample_ground_truth = false;
  /// 0 = REUSE_LAB_THREADS or hardware concurrency.
  std::size_t threads = 0;
};

std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t replica);

/// Expected excess risk over datasets, noise and shuffles.
RiskEstimate monte_carlo_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta,
                              std::int64_t replicas, std::uint64_t base_seed,
                              const MonteCarloOptions& options = {});

/// Same estimator at several learning rates with common random numbers.
/// Learning rates that diverge on any replica report mean = std_error = +infinity.
std::vector<RiskEstimate> monte_carlo_risk_sweep(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                                 std::span<const double> etas, std::int64_t replicas,
                                                 std::uint64_t base_seed,
                                                 const MonteCarloOptions& options = {});

}  // namespace reuse_lab
