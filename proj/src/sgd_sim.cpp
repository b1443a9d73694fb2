#include "reuse_lab/sgd_sim.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "reuse_lab/parallel.hpp"
#include "reuse_lab/rng.hpp"

namespace reuse_lab {

namespace {

constexpr std::int64_t kCheckInterval = 256;
constexpr double kDivergenceFactor = 1e8;

// Four independent accumulators: fixed summation order, vectorisable.
inline double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t k = 0; k < n; ++k) y[k] -= alpha * x[k];
}

const ZipfModel* zipf_of(const DataSource& source) {
  if (const auto* z = std::get_if<ZipfData>(&source)) {
    if (!z->model) throw ModelError("Zipf data source has no model");
    return z->model.get();
  }
  return nullptr;
}

std::vector<double> sqrt_of(std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(values[i]);
  return out;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto engine = rng::engine(seed, rng::Stream::Permutation, epoch);
  for (std::size_t i = n; i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(engine)]);
  }
  return order;
}

// Sequential generator of training points for one run.
class PointStream {
 public:
  PointStream(const Problem& problem, const DataSource& source, std::uint64_t seed)
      : model_(zipf_of(source)),
        data_engine_(rng::engine(seed, rng::Stream::Data)),
        noise_engine_(rng::engine(seed, rng::Stream::Noise)),
        sigma_(problem.noise_std()) {
    if (model_ != nullptr) {
      if (model_->dimension() != problem.dimension())
        throw ModelError("Zipf data source dimension does not match the problem");
      const auto p = model_->probabilities();
      atoms_ = boost::random::discrete_distribution<std::uint32_t, double>(p.begin(), p.end());
    } else {
      root_lambda_ = sqrt_of(problem.spectrum().eigenvalues());
    }
  }

  void next_gaussian(double* x) {
    for (std::size_t k = 0; k < root_lambda_.size(); ++k) x[k] = root_lambda_[k] * normal_(data_engine_);
  }
  std::uint32_t next_atom() { return atoms_(data_engine_); }
  double next_noise() { return sigma_ * noise_normal_(noise_engine_); }

 private:
  const ZipfModel* model_;
  rng::Engine data_engine_;
  rng::Engine noise_engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::normal_distribution<double> noise_normal_;
  boost::random::discrete_distribution<std::uint32_t, double> atoms_;
  std::vector<double> root_lambda_;
  double sigma_;
};

// Parallel SGD iterates (one per learning rate) driven by the same data, in
// error coordinates theta = w - w*. Single-rate runs may also track the
// bias/variance decomposition.
class Lanes {
 public:
  Lanes(const Problem& problem, std::span<const double> etas, bool track,
        std::span<const double> root_scales)
      : d_(problem.dimension()),
        etas_(etas.begin(), etas.end()),
        diverged_(etas.size(), false),
        divergence_step_(etas.size(), -1),
        truth_(problem.ground_truth().begin(), problem.ground_truth().end()),
        root_scales_(root_scales.begin(), root_scales.end()),
        track_(track) {
    const auto theta0 = problem.initial_error();
    theta_.reserve(d_ * etas_.size());
    for (std::size_t g = 0; g < etas_.size(); ++g) theta_.insert(theta_.end(), theta0.begin(), theta0.end());
    if (track_) {
      bias_ = theta0;
      var_.assign(d_, 0.0);
    }
    const double truth_norm = std::sqrt(dot(truth_.data(), truth_.data(), d_));
    const double limit = kDivergenceFactor * (1.0 + truth_norm);
    limit_sq_ = limit * limit;
  }

  void gaussian_step(const double* x, double xi) noexcept {
    for (std::size_t g = 0; g < etas_.size(); ++g) {
      if (diverged_[g]) continue;
      double* theta = &theta_[g * d_];
      const double residual = dot(x, theta, d_) - xi;
      axpy(etas_[g] * residual, x, theta, d_);
    }
    if (track_) {
      const double eta = etas_.front();
      axpy(eta * dot(x, bias_.data(), d_), x, bias_.data(), d_);
      axpy(eta * (dot(x, var_.data(), d_) - xi), x, var_.data(), d_);
    }
  }

  void one_hot_step(std::uint32_t i, double xi) noexcept {
    const double mu = root_scales_[i];
    for (std::size_t g = 0; g < etas_.size(); ++g) {
      double& t = theta_[g * d_ + i];
      t -= etas_[g] * mu * (mu * t - xi);
    }
    if (track_) {
      const double eta = etas_.front();
      bias_[i] -= eta * mu * (mu * bias_[i]);
      var_[i] -= eta * mu * (mu * var_[i] - xi);
    }
  }

  void check(std::int64_t step) noexcept {
    for (std::size_t g = 0; g < etas_.size(); ++g) {
      if (diverged_[g]) continue;
      const double* theta = &theta_[g * d_];
      double norm_sq = 0.0;
      for (std::size_t k = 0; k < d_; ++k) {
        const double w = theta[k] + truth_[k];
        norm_sq += w * w;
      }
      if (!std::isfinite(norm_sq) || norm_sq > limit_sq_) {
        diverged_[g] = true;
        divergence_step_[g] = step;
      }
    }
  }

  std::size_t count() const noexcept { return etas_.size(); }
  bool diverged(std::size_t g) const noexcept { return diverged_[g]; }
  std::int64_t divergence_step(std::size_t g) const noexcept { return divergence_step_[g]; }
  std::span<const double> theta(std::size_t g) const noexcept { return {&theta_[g * d_], d_}; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  const std::vector<double>& var() const noexcept { return var_; }

 private:
  std::size_t d_;
  std::vector<double> etas_;
  std::vector<double> theta_;
  std::vector<bool> diverged_;
  std::vector<std::int64_t> divergence_step_;
  std::vector<double> truth_;
  std::vector<double> root_scales_;
  bool track_;
  std::vector<double> bias_;
  std::vector<double> var_;
  double limit_sq_ = 0.0;
};

std::vector<double> root_scales_for(const DataSource& source) {
  if (const ZipfModel* model = zipf_of(source)) return sqrt_of(model->scales());
  return {};
}

// Streams epoch 1 straight from the generator; stores points only when
// later epochs need to revisit them.
void drive(const Problem& problem, const DataSource& source, std::int64_t epochs, std::int64_t n,
           std::uint64_t seed, Lanes& lanes) {
  const std::size_t d = problem.dimension();
  const auto count = static_cast<std::size_t>(n);
  const bool store = epochs > 1;
  const bool one_hot = zipf_of(source) != nullptr;
  PointStream stream(problem, source, seed);

  std::vector<double> inputs(one_hot ? 0 : (store ? count * d : d));
  std::vector<std::uint32_t> atoms(one_hot && store ? count : 0);
  std::vector<double> noise(store ? count : 0);

  std::int64_t step = 0;
  auto tick = [&] {
    if (++step % kCheckInterval == 0) lanes.check(step);
  };

  for (std::size_t j = 0; j < count; ++j) {
    if (one_hot) {
      const std::uint32_t atom = stream.next_atom();
      const double xi = stream.next_noise();
      if (store) {
        atoms[j] = atom;
        noise[j] = xi;
      }
      lanes.one_hot_step(atom, xi);
    } else {
      double* x = store ? &inputs[j * d] : inputs.data();
      stream.next_gaussian(x);
      const double xi = stream.next_noise();
      if (store) noise[j] = xi;
      lanes.gaussian_step(x, xi);
    }
    tick();
  }
  for (std::int64_t epoch = 2; epoch <= epochs; ++epoch) {
    const auto order = shuffled_order(count, seed, static_cast<std::size_t>(epoch));
    for (std::size_t j : order) {
      if (one_hot)
        lanes.one_hot_step(atoms[j], noise[j]);
      else
        lanes.gaussian_step(&inputs[j * d], noise[j]);
      tick();
    }
  }
  lanes.check(step);
}

double risk_of_error(const Problem& problem, std::span<const double> theta) {
  const auto lambda = problem.spectrum().eigenvalues();
  double sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) sum += lambda[i] * theta[i] * theta[i];
  return 0.5 * sum;
}

Trajectory to_trajectory(const Problem& problem, const Lanes& lanes, std::int64_t steps, bool track) {
  Trajectory out;
  const auto theta = lanes.theta(0);
  const auto truth = problem.ground_truth();
  out.final_weight.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out.final_weight[i] = truth[i] + theta[i];
  if (track) {
    out.final_bias = lanes.bias();
    out.final_var = lanes.var();
  }
  out.steps_taken = steps;
  return out;
}

void validate_shape(std::int64_t epochs, std::int64_t n) {
  if (epochs < 1) throw ModelError("epochs K must be >= 1");
  if (n < 1) throw ModelError("dataset size N must be >= 1");
}

}  // namespace

DivergenceError::DivergenceError(std::int64_t step, std::uint64_t seed)
    : std::runtime_error("SGD diverged at step " + std::to_string(step) + " (seed " + std::to_string(seed) + ")"),
      step_(step),
      seed_(seed) {}

Dataset Dataset::with_negated_noise() const {
  Dataset out = *this;
  for (double& xi : out.noise) xi = -xi;
  return out;
}

RiskEstimate estimate_from_samples(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("risk estimate needs at least one sample");
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
  return RiskEstimate{mean, std::sqrt(var / n), static_cast<std::int64_t>(samples.size())};
}

double excess_risk(const Problem& problem, std::span<const double> w) {
  if (w.size() != problem.dimension()) throw ModelError("weight vector length must equal the dimension");
  const auto lambda = problem.spectrum().eigenvalues();
  const auto truth = problem.ground_truth();
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double diff = w[i] - truth[i];
    sum += lambda[i] * diff * diff;
  }
  return 0.5 * sum;
}

Dataset draw_dataset(const Problem& problem, const DataSource& source, std::size_t n, std::uint64_t seed) {
  Dataset data;
  data.dimension = problem.dimension();
  PointStream stream(problem, source, seed);
  if (const auto* z = std::get_if<ZipfData>(&source)) {
    data.model = z->model;
    data.atoms.resize(n);
  } else {
    data.inputs.resize(n * data.dimension);
  }
  data.noise.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (data.one_hot())
      data.atoms[j] = stream.next_atom();
    else
      stream.next_gaussian(&data.inputs[j * data.dimension]);
    data.noise[j] = stream.next_noise();
  }
  return data;
}

std::vector<std::vector<std::size_t>> draw_epoch_orders(std::size_t n, std::size_t epochs, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> orders;
  orders.reserve(epochs);
  if (epochs == 0) return orders;
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  orders.push_back(std::move(identity));
  for (std::size_t epoch = 2; epoch <= epochs; ++epoch) orders.push_back(shuffled_order(n, seed, epoch));
  return orders;
}

Trajectory run_sgd_on(const Problem& problem, const Dataset& data, std::span<const std::vector<std::size_t>> orders,
                      double eta, bool track_decomposition, std::uint64_t seed_for_errors) {
  if (data.dimension != problem.dimension()) throw ModelError("dataset dimension does not match the problem");
  const double etas[] = {eta};
  const std::vector<double> scales = data.one_hot() ? sqrt_of(data.model->scales()) : std::vector<double>{};
  Lanes lanes(problem, etas, track_decomposition, scales);
  const std::size_t d = data.dimension;
  std::int64_t step = 0;
  for (const auto& order : orders) {
    for (std::size_t j : order) {
      if (j >= data.size()) throw std::out_of_range("epoch order refers to a point outside the dataset");
      if (data.one_hot())
        lanes.one_hot_step(data.atoms[j], data.noise[j]);
      else
        lanes.gaussian_step(&data.inputs[j * d], data.noise[j]);
      if (++step % kCheckInterval == 0) lanes.check(step);
    }
  }
  lanes.check(step);
  if (lanes.diverged(0)) throw DivergenceError(lanes.divergence_step(0), seed_for_errors);
  return to_trajectory(problem, lanes, step, track_decomposition);
}

Trajectory run_sgd(const Problem& problem, const SgdRun& run, const DataSource& source, bool track_decomposition) {
  run.validate();
  const double etas[] = {run.learning_rate};
  Lanes lanes(problem, etas, track_decomposition, root_scales_for(source));
  drive(problem, source, run.epochs, run.dataset_size, run.seed, lanes);
  if (lanes.diverged(0)) throw DivergenceError(lanes.divergence_step(0), run.seed);
  return to_trajectory(problem, lanes, run.epochs * run.dataset_size, track_decomposition);
}

std::vector<double> final_risks(const Problem& problem, const DataSource& source, std::int64_t epochs,
                                std::int64_t n, std::span<const double> etas, std::uint64_t seed) {
  validate_shape(epochs, n);
  Lanes lanes(problem, etas, false, root_scales_for(source));
  drive(problem, source, epochs, n, seed, lanes);
  std::vector<double> risks(etas.size());
  for (std::size_t g = 0; g < etas.size(); ++g)
    risks[g] = lanes.diverged(g) ? std::numeric_limits<double>::infinity() : risk_of_error(problem, lanes.theta(g));
  return risks;
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::int64_t replica) {
  return rng::derive(base_seed, rng::Stream::Replica, static_cast<std::uint64_t>(replica));
}

namespace {

Problem replica_problem(const Problem& problem, std::uint64_t seed, const MonteCarloOptions& options) {
  if (!options.resample_ground_truth) return problem;
  return problem.with_ground_truth(draw_standard_normal(problem.dimension(), seed));
}

}  // namespace

RiskEstimate monte_carlo_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta,
                              std::int64_t replicas, std::uint64_t base_seed, const MonteCarloOptions& options) {
  validate_shape(epochs, n);
  if (replicas < 2) throw std::invalid_argument("Monte Carlo risk needs replicas >= 2");
  std::vector<double> samples(static_cast<std::size_t>(replicas));
  parallel_for(samples.size(), options.threads, [&](std::size_t r) {
    const std::uint64_t seed = replica_seed(base_seed, static_cast<std::int64_t>(r));
    const Problem local = replica_problem(problem, seed, options);
    const double etas[] = {eta};
    Lanes lanes(local, etas, false, root_scales_for(options.source));
    drive(local, options.source, epochs, n, seed, lanes);
    if (lanes.diverged(0)) throw DivergenceError(lanes.divergence_step(0), seed);
    samples[r] = risk_of_error(local, lanes.theta(0));
  });
  return estimate_from_samples(samples);
}

std::vector<RiskEstimate> monte_carlo_risk_sweep(const Problem& problem, std::int64_t epochs, std::int64_t n,
                                                 std::span<const double> etas, std::int64_t replicas,
                                                 std::uint64_t base_seed, const MonteCarloOptions& options) {
  validate_shape(epochs, n);
  if (replicas < 2) throw std::invalid_argument("Monte Carlo risk needs replicas >= 2");
  const std::size_t lanes_count = etas.size();
  const auto reps = static_cast<std::size_t>(replicas);
  // samples[g * reps + r]
  std::vector<double> samples(lanes_count * reps);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    const std::uint64_t seed = replica_seed(base_seed, static_cast<std::int64_t>(r));
    const Problem local = replica_problem(problem, seed, options);
    const auto risks = final_risks(local, options.source, epochs, n, etas, seed);
    for (std::size_t g = 0; g < lanes_count; ++g) samples[g * reps + r] = risks[g];
  });
  std::vector<RiskEstimate> out;
  out.reserve(lanes_count);
  for (std::size_t g = 0; g < lanes_count; ++g) {
    const std::span<const double> lane(&samples[g * reps], reps);
    bool finite = true;
    for (double s : lane) finite = finite && std::isfinite(s);
    if (!finite) {
      const double inf = std::numeric_limits<double>::infinity();
      out.push_back(RiskEstimate{inf, inf, replicas});
    } else {
      out.push_back(estimate_from_samples(lane));
    }
  }
  return out;
}

}  // namespace reuse_lab
