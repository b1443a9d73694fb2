#pragma once

#include <cstdint>
#include <stdexcept>

#include "reuse_lab/model.hpp"

namespace reuse_lab {

/// Raised when a formula is evaluated outside the parameter range it is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Three-term excess-risk estimator for K-epoch SGD on a strongly convex problem.
struct RiskBreakdown {
  double bias = 0.0;               // 1/2 theta0^T (I - eta H)^{2KN} H theta0
  double var_across_epochs = 0.0;  // noise correlated across epochs
  double var_within_epoch = 0.0;   // stationary SGD noise
  double total = 0.0;
};

/// Requires 0 < eta < 1/lambda_1. Powers (1 - eta lambda)^m are evaluated in
/// log space so m = 2KN of order 1e8 stays accurate.
RiskBreakdown approx_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta);

enum class Regime { SmallK, LargeK };

/// M(K, N; eta) = 1/2 thetã_d^2 lambda_d exp(-2 lambda_d eta K N) + eta tr(H) sigma^2 / 4,
/// plus sigma^2 d / (2N) in the large-K regime.
double simplified_risk(const Problem& problem, std::int64_t epochs, std::int64_t n, double eta, Regime regime);

struct LearningRate {
  double eta = 0.0;
  /// eta > 1/D^2, i.e. outside the stability range of the analysis.
  bool exceeds_stability = false;
};

/// eta' = log(rho K N) / (2 lambda_d K N), rho = 4 thetã_d^2 lambda_d / (tr(H) sigma^2).
LearningRate optimal_lr(const Problem& problem, std::int64_t epochs, std::int64_t n);

/// Exact expected excess risk of K-epoch SGD on the one-hot model under the
/// isotropic prior: 1/2 sum_i p_i Lambda_i (1 - p_i + p_i (1 - eta Lambda_i)^{2K})^N.
/// N may be fractional. Requires 0 <= eta < 2/Lambda_1.
double zipf_risk(const ZipfModel& model, std::int64_t epochs, double n, double eta);

/// N'(K, N) = (1 + R* (1 - exp(-(K-1)/R*))) N.
double muennighoff_effective_n(std::int64_t epochs, double n, double r_star = 15.39);

}  // namespace reuse_lab
