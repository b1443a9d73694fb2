#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace reuse_lab {

/// Raised when a constructor argument violates a model invariant.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigenvalues of a diagonal data covariance H, sorted non-increasing.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> eigenvalues);

  static Spectrum isotropic(std::size_t d, double value = 1.0);

  std::size_t dimension() const noexcept { return eigenvalues_.size(); }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  double operator[](std::size_t i) const { return eigenvalues_[i]; }

  double largest() const noexcept { return eigenvalues_.front(); }
  double smallest() const noexcept { return eigenvalues_.back(); }
  double trace() const noexcept { return trace_; }
  double trace_of_square() const noexcept;

  /// Number of trailing coordinates in the minimal eigenspace, i.e. those
  /// with lambda_i <= lambda_d * (1 + 1e-9).
  std::size_t bottom_multiplicity() const noexcept;

 private:
  std::vector<double> eigenvalues_;
  double trace_ = 0.0;
};

/// A linear regression problem in the eigenbasis of H: y = <w*, x> + xi with
/// E xi^2 = sigma^2, SGD initialised at w0, and ||x|| <= D assumed.
class Problem {
 public:
  /// An empty `init` means w0 = 0. A non-positive `data_bound` means D = sqrt(lambda_1).
  Problem(Spectrum spectrum, std::vector<double> ground_truth, double noise_std,
          std::vector<double> init = {}, double data_bound = 0.0);

  const Spectrum& spectrum() const noexcept { return spectrum_; }
  std::size_t dimension() const noexcept { return spectrum_.dimension(); }
  std::span<const double> ground_truth() const noexcept { return ground_truth_; }
  std::span<const double> init() const noexcept { return init_; }
  double noise_std() const noexcept { return noise_std_; }
  double data_bound() const noexcept { return data_bound_; }

  /// theta_0 = w0 - w*.
  std::vector<double> initial_error() const;

  /// Squared norm of theta_0 restricted to the minimal eigenspace.
  double bottom_error_mass() const noexcept;

  /// Largest learning rate inside the stability range eta <= 1/D^2.
  double stable_lr_bound() const noexcept { return 1.0 / (data_bound_ * data_bound_); }

  /// Same problem with a different ground truth (used to resample the prior).
  Problem with_ground_truth(std::vector<double> ground_truth) const;

 private:
  Spectrum spectrum_;
  std::vector<double> ground_truth_;
  double noise_std_;
  std::vector<double> init_;
  double data_bound_;
};

enum class ZipfLaw { Power, LogPower, Explicit };

std::string to_string(ZipfLaw law);
ZipfLaw zipf_law_from_string(const std::string& name);

/// One-hot data model: x = mu_i e_i with probability p_i, Lambda_i = mu_i^2.
class ZipfModel {
 public:
  /// Explicit model; validates that p is a simplex vector and Lambda is
  /// positive and non-increasing.
  ZipfModel(std::vector<double> probabilities, std::vector<double> scales);

  std::size_t dimension() const noexcept { return probabilities_.size(); }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::span<const double> scales() const noexcept { return scales_; }
  ZipfLaw law() const noexcept { return law_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  double largest_scale() const noexcept { return scales_.front(); }

  /// Diagonal of H = P Lambda.
  std::vector<double> hessian_diagonal() const;

 private:
  friend ZipfModel make_zipf(ZipfLaw, double, double, std::size_t);
  ZipfModel() = default;

  std::vector<double> probabilities_;
  std::vector<double> scales_;
  ZipfLaw law_ = ZipfLaw::Explicit;
  double a_ = 0.0;
  double b_ = 0.0;
};

/// Multi-epoch SGD configuration.
struct SgdRun {
  std::int64_t epochs = 1;
  std::int64_t dataset_size = 1;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// eta <= 1/D^2 for the given problem.
  bool within_stability(const Problem& problem) const noexcept;
};

/// Isotropic Gaussian design x ~ N(0, I_d) with w* ~ N(0, I_d) drawn from `seed`.
/// D = sqrt(d) + 6 is used only for the stability check; inputs are untruncated.
Problem make_gaussian_isotropic(std::size_t d, double sigma, std::uint64_t seed);

/// Power: p_i = c i^{-(a-b)}, Lambda_i = i^{-b}, needs a - b > 1.
/// LogPower: p_i = c i^{-a} log^b(i+1), Lambda_i = log^{-b}(i+1), needs a > 1, b > 0.
ZipfModel make_zipf(ZipfLaw law, double a, double b, std::size_t d);

/// Problem whose covariance is the one-hot model's H = P Lambda, with
/// w* ~ N(0, I) drawn from `seed` and D^2 = max Lambda_i.
Problem make_zipf_problem(const ZipfModel& model, double sigma, std::uint64_t seed);

/// Draws a length-d standard normal vector from the ground-truth stream of `seed`.
std::vector<double> draw_standard_normal(std::size_t d, std::uint64_t seed);

}  // namespace reuse_lab
