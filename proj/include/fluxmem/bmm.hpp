#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fluxmem::bmm {

/// Two-component Beta mixture over normalized match scores. Component 1 is the
/// high-compatibility regime: after fitting, mean(1) >= mean(0).
struct BetaMixture {
  double pi = 0.5;  // weight of component 1
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double alpha1 = 1.0;
  double beta1 = 1.0;

  double mean0() const { return alpha0 / (alpha0 + beta0); }
  double mean1() const { return alpha1 / (alpha1 + beta1); }
};

inline constexpr double kShapeMin = 0.01;
inline constexpr double kShapeMax = 1e4;
inline constexpr double kPiMin = 1e-6;
inline constexpr double kConcentrationMin = 0.02;
inline constexpr double kConcentrationMax = 2e4;
inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kInitVariance = 0.01;
inline constexpr double kConvergenceDelta = 1e-7;

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, n = 9; reflection below 0.5).
double log_gamma(double x);

/// ln Beta(x; alpha, beta). Throws DomainError unless 0 < x < 1 and alpha, beta > 0.
double log_beta_pdf(double x, double alpha, double beta);

/// Min-max maps scores into [eps, 1-eps]; a constant list maps to 0.5 everywhere.
/// Throws InvalidArgument for an empty list or eps outside (0, 0.1).
std::vector<double> normalize_scores(std::span<const double> scores, double eps);

/// Shape parameters whose mean is `mean` and variance `variance`, with the variance floor and
/// the concentration / shape clips applied.
std::pair<double, double> moment_match(double mean, double variance);

/// Linear-interpolated empirical quantile of unsorted data, q in [0,1].
double empirical_quantile(std::span<const double> values, double q);

/// Observed-data log-likelihood sum_i ln p(x_i).
double log_likelihood(const BetaMixture& m, std::span<const double> x);

struct FitTrace {
  BetaMixture mixture;
  /// log_likelihoods[0] is at initialization, then one entry per completed iteration.
  std::vector<double> log_likelihoods;
  int iterations = 0;
  /// Iterations whose moment-matched shapes were pulled back toward the previous shapes
  /// because they would have lowered the likelihood.
  int damped_steps = 0;
  bool degenerate = false;
};

/// EM fit with quantile initialization, log-space E-step and a moment-matching M-step.
/// Each iteration is accepted only if the observed log-likelihood does not drop; otherwise
/// the shape update is halved toward the previous shapes (the weight update alone can never
/// lower it). Throws InvalidArgument if |x| < 2 and DomainError for x outside (0,1).
FitTrace fit_beta_mixture_traced(std::span<const double> x, int iterations);

BetaMixture fit_beta_mixture(std::span<const double> x, int iterations);

/// Posterior of component 1. Throws DomainError for x outside (0,1).
double gate(const BetaMixture& m, double x);

/// Posterior of component 0 (1 - gate, computed independently in log space).
double low_posterior(const BetaMixture& m, double x);

struct GateParams {
  double threshold = 0.5;
  int min_keep = 1;
  int em_iters = 50;
  double epsilon = 1e-3;
  double new_session_floor = 0.15;
};

struct GateDecision {
  std::vector<double> gates;    // g(x_i), one per candidate
  std::vector<int> retained;    // ascending candidate indices
  std::optional<int> preferred;     // best retained candidate before the raw-score floor
  std::optional<int> merge_target;  // empty means open a new session
  std::optional<BetaMixture> mixture;  // absent when the fit was skipped

  bool merges() const { return merge_target.has_value(); }
};

/// Merge-or-new decision over raw match scores of the candidate sessions.
GateDecision decide_fusion(std::span<const double> scores, const GateParams& params);

/// Baseline without the mixture: merge into the best candidate iff its raw score reaches
/// `threshold`.
GateDecision decide_by_threshold(std::span<const double> scores, double threshold);

}  // namespace fluxmem::bmm
