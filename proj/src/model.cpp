#include "reuse_lab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/normal_distribution.hpp>

#include "reuse_lab/rng.hpp"

namespace reuse_lab {

namespace {

constexpr double kSimplexTolerance = 1e-12;
constexpr double kBottomRelTolerance = 1e-9;

double kahan_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void normalize(std::vector<double>& weights) {
  const double total = kahan_sum(weights);
  for (double& w : weights) w /= total;
}

}  // namespace

Spectrum::Spectrum(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) throw ModelError("spectrum must have at least one eigenvalue");
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    if (!(eigenvalues_[i] > 0.0) || !std::isfinite(eigenvalues_[i]))
      throw ModelError("spectrum eigenvalues must be finite and strictly positive");
    if (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1])
      throw ModelError("spectrum eigenvalues must be sorted non-increasing");
  }
  trace_ = kahan_sum(eigenvalues_);
}

Spectrum Spectrum::isotropic(std::size_t d, double value) {
  return Spectrum(std::vector<double>(d, value));
}

double Spectrum::trace_of_square() const noexcept {
  return std::accumulate(eigenvalues_.begin(), eigenvalues_.end(), 0.0,
                         [](double acc, double v) { return acc + v * v; });
}

std::size_t Spectrum::bottom_multiplicity() const noexcept {
  const double cutoff = smallest() * (1.0 + kBottomRelTolerance);
  return static_cast<std::size_t>(
      std::count_if(eigenvalues_.begin(), eigenvalues_.end(), [&](double v) { return v <= cutoff; }));
}

Problem::Problem(Spectrum spectrum, std::vector<double> ground_truth, double noise_std,
                 std::vector<double> init, double data_bound)
    : spectrum_(std::move(spectrum)),
      ground_truth_(std::move(ground_truth)),
      noise_std_(noise_std),
      init_(std::move(init)),
      data_bound_(data_bound) {
  const std::size_t d = spectrum_.dimension();
  if (ground_truth_.size() != d) throw ModelError("ground truth length must equal the dimension");
  if (init_.empty()) init_.assign(d, 0.0);
  if (init_.size() != d) throw ModelError("initial weight length must equal the dimension");
  if (!(noise_std_ >= 0.0) || !std::isfinite(noise_std_))
    throw ModelError("noise standard deviation must be finite and non-negative");
  if (!(data_bound_ > 0.0)) data_bound_ = std::sqrt(spectrum_.largest());
  if (!std::isfinite(data_bound_)) throw ModelError("data bound must be finite");
  // Allow rounding slack when D was computed as sqrt(lambda_1).
  if (spectrum_.largest() > data_bound_ * data_bound_ * (1.0 + 1e-12))
    throw ModelError("data bound must satisfy lambda_1 <= D^2");
}

std::vector<double> Problem::initial_error() const {
  std::vector<double> theta(dimension());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = init_[i] - ground_truth_[i];
  return theta;
}

double Problem::bottom_error_mass() const noexcept {
  const std::size_t d = dimension();
  const std::size_t first = d - spectrum_.bottom_multiplicity();
  double mass = 0.0;
  for (std::size_t i = first; i < d; ++i) {
    const double t = init_[i] - ground_truth_[i];
    mass += t * t;
  }
  return mass;
}

Problem Problem::with_ground_truth(std::vector<double> ground_truth) const {
  return Problem(spectrum_, std::move(ground_truth), noise_std_, init_, data_bound_);
}

std::string to_string(ZipfLaw law) {
  switch (law) {
    case ZipfLaw::Power:
      return "power";
    case ZipfLaw::LogPower:
      return "log_power";
    case ZipfLaw::Explicit:
      return "explicit";
  }
  return "explicit";
}

ZipfLaw zipf_law_from_string(const std::string& name) {
  if (name == "power") return ZipfLaw::Power;
  if (name == "log_power" || name == "log-power" || name == "logpower") return ZipfLaw::LogPower;
  if (name == "explicit") return ZipfLaw::Explicit;
  throw ModelError("unknown Zipf law '" + name + "'");
}

ZipfModel::ZipfModel(std::vector<double> probabilities, std::vector<double> scales)
    : probabilities_(std::move(probabilities)), scales_(std::move(scales)) {
  if (probabilities_.empty()) throw ModelError("Zipf model needs d >= 1");
  if (probabilities_.size() != scales_.size())
    throw ModelError("Zipf probabilities and scales must have equal length");
  for (std::size_t i = 0; i < probabilities_.size(); ++i) {
    if (!(probabilities_[i] > 0.0)) throw ModelError("Zipf probabilities must be strictly positive");
    if (!(scales_[i] > 0.0) || !std::isfinite(scales_[i]))
      throw ModelError("Zipf scales must be finite and strictly positive");
    if (i > 0 && scales_[i] > scales_[i - 1]) throw ModelError("Zipf scales must be non-increasing");
  }
  if (std::abs(kahan_sum(probabilities_) - 1.0) > kSimplexTolerance)
    throw ModelError("Zipf probabilities must sum to 1 within 1e-12");
}

std::vector<double> ZipfModel::hessian_diagonal() const {
  std::vector<double> h(dimension());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = probabilities_[i] * scales_[i];
  return h;
}

void SgdRun::validate() const {
  if (epochs < 1) throw ModelError("epochs K must be >= 1");
  if (dataset_size < 1) throw ModelError("dataset size N must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ModelError("learning rate must be finite and non-negative");
}

bool SgdRun::within_stability(const Problem& problem) const noexcept {
  return learning_rate <= problem.stable_lr_bound();
}

std::vector<double> draw_standard_normal(std::size_t d, std::uint64_t seed) {
  auto engine = rng::engine(seed, rng::Stream::GroundTruth);
  boost::random::normal_distribution<double> normal;
  std::vector<double> out(d);
  for (double& v : out) v = normal(engine);
  return out;
}

Problem make_gaussian_isotropic(std::size_t d, double sigma, std::uint64_t seed) {
  if (d == 0) throw ModelError("dimension d must be >= 1");
  if (!(sigma >= 0.0)) throw ModelError("sigma must be non-negative");
  const double bound = std::sqrt(static_cast<double>(d)) + 6.0;
  return Problem(Spectrum::isotropic(d), draw_standard_normal(d, seed), sigma, {}, bound);
}

ZipfModel make_zipf(ZipfLaw law, double a, double b, std::size_t d) {
  if (d == 0) throw ModelError("dimension d must be >= 1");
  ZipfModel model;
  model.law_ = law;
  model.a_ = a;
  model.b_ = b;
  model.probabilities_.resize(d);
  model.scales_.resize(d);
  switch (law) {
    case ZipfLaw::Power:
      if (!(a - b > 1.0)) throw ModelError("power-law spectrum requires a - b > 1");
      if (!(b >= 0.0)) throw ModelError("power-law spectrum requires b >= 0");
      for (std::size_t i = 0; i < d; ++i) {
        const double idx = static_cast<double>(i + 1);
        model.probabilities_[i] = std::pow(idx, -(a - b));
        model.scales_[i] = std::pow(idx, -b);
      }
      break;
    case ZipfLaw::LogPower:
      if (!(a > 1.0)) throw ModelError("logarithmic power-law spectrum requires a > 1");
      if (!(b > 0.0)) throw ModelError("logarithmic power-law spectrum requires b > 0");
      for (std::size_t i = 0; i < d; ++i) {
        const double idx = static_cast<double>(i + 1);
        const double log_b = std::pow(std::log(idx + 1.0), b);
        model.probabilities_[i] = std::pow(idx, -a) * log_b;
        model.scales_[i] = 1.0 / log_b;
      }
      break;
    case ZipfLaw::Explicit:
      throw ModelError("explicit Zipf models are built from probability and scale vectors");
  }
  normalize(model.probabilities_);
  return model;
}

Problem make_zipf_problem(const ZipfModel& model, double sigma, std::uint64_t seed) {
  return Problem(Spectrum(model.hessian_diagonal()), draw_standard_normal(model.dimension(), seed),
                 sigma, {}, std::sqrt(model.largest_scale()));
}

}  // namespace reuse_lab
