#include "fluxmem/bmm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fluxmem/error.hpp"

namespace fluxmem::bmm {
namespace {

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

void require_unit_interval(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("score " + std::to_string(x) + " is outside the open interval (0,1)");
  }
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -INFINITY) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// One component's shape terms, with the three log-gamma values computed once.
struct Component {
  double alpha, beta, lg_sum, lg_alpha, lg_beta;
  Component(double a, double b)
      : alpha(a), beta(b), lg_sum(log_gamma(a + b)), lg_alpha(log_gamma(a)), lg_beta(log_gamma(b)) {}
  double log_pdf(double log_x, double log_1mx) const {
    return (alpha - 1.0) * log_x + (beta - 1.0) * log_1mx + lg_sum - lg_alpha - lg_beta;
  }
};

// Unchecked density; x is validated by the caller.
double log_beta_unchecked(double x, double alpha, double beta) {
  return Component(alpha, beta).log_pdf(std::log(x), std::log1p(-x));
}

double clamp_pi(double pi) { return std::clamp(pi, kPiMin, 1.0 - kPiMin); }

struct Shapes {
  double a0, b0, a1, b1;
};

BetaMixture with_shapes(double pi, const Shapes& s) { return {pi, s.a0, s.b0, s.a1, s.b1}; }

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires a positive argument");
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    series += kLanczos[i] / (z + static_cast<double>(i));
  }
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

double log_beta_pdf(double x, double alpha, double beta) {
  require_unit_interval(x);
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("Beta shape parameters must be positive");
  return log_beta_unchecked(x, alpha, beta);
}

std::vector<double> normalize_scores(std::span<const double> scores, double eps) {
  if (scores.empty()) throw InvalidArgument("normalize_scores requires at least one score");
  if (!(eps > 0.0 && eps < 0.1)) throw InvalidArgument("epsilon must lie in (0, 0.1)");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size(), 0.5);
  if (*hi > *lo) {
    const double range = *hi - *lo;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out[i] = eps + (1.0 - 2.0 * eps) * (scores[i] - *lo) / range;
    }
  }
  return out;
}

std::pair<double, double> moment_match(double mean, double variance) {
  const double var = std::max(variance, kVarianceFloor);
  double kappa = mean * (1.0 - mean) / var - 1.0;
  kappa = std::clamp(kappa, kConcentrationMin, kConcentrationMax);
  const double alpha = std::clamp(mean * kappa, kShapeMin, kShapeMax);
  const double beta = std::clamp((1.0 - mean) * kappa, kShapeMin, kShapeMax);
  return {alpha, beta};
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double log_likelihood(const BetaMixture& m, std::span<const double> x) {
  const double log_pi1 = std::log(m.pi);
  const double log_pi0 = std::log1p(-m.pi);
  const Component c0(m.alpha0, m.beta0);
  const Component c1(m.alpha1, m.beta1);
  double total = 0.0;
  for (double xi : x) {
    const double lx = std::log(xi);
    const double l1x = std::log1p(-xi);
    total += log_sum_exp(log_pi0 + c0.log_pdf(lx, l1x), log_pi1 + c1.log_pdf(lx, l1x));
  }
  return total;
}

FitTrace fit_beta_mixture_traced(std::span<const double> x, int iterations) {
  if (x.size() < 2) throw InvalidArgument("fitting a mixture needs at least two scores");
  for (double xi : x) require_unit_interval(xi);
  const auto n = static_cast<double>(x.size());

  FitTrace trace;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi == *lo) {
    const auto [a, b] = moment_match(*lo, 0.0);
    trace.mixture = {0.5, a, b, a, b};
    trace.degenerate = true;
    trace.log_likelihoods.push_back(log_likelihood(trace.mixture, x));
    return trace;
  }

  double mu0 = empirical_quantile(x, 0.3);
  double mu1 = empirical_quantile(x, 0.7);
  if (mu1 - mu0 < 1e-9) {
    // Tied quantiles would start both components identical and EM could never split them.
    mu0 = 0.5 * (*lo + mu0);
    mu1 = 0.5 * (*hi + mu1);
  }
  const auto [a0, b0] = moment_match(mu0, kInitVariance);
  const auto [a1, b1] = moment_match(mu1, kInitVariance);
  double pi = 0.5;
  Shapes shapes{a0, b0, a1, b1};
  double current_ll = log_likelihood(with_shapes(pi, shapes), x);
  trace.log_likelihoods.push_back(current_ll);

  std::vector<double> r0(x.size());
  std::vector<double> r1(x.size());
  for (int it = 0; it < iterations; ++it) {
    // E-step in log space.
    const double log_pi1 = std::log(pi);
    const double log_pi0 = std::log1p(-pi);
    const Component c0(shapes.a0, shapes.b0);
    const Component c1(shapes.a1, shapes.b1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double l0 = log_pi0 + c0.log_pdf(std::log(x[i]), std::log1p(-x[i]));
      const double l1 = log_pi1 + c1.log_pdf(std::log(x[i]), std::log1p(-x[i]));
      const double norm = log_sum_exp(l0, l1);
      r0[i] = std::exp(l0 - norm);
      r1[i] = std::exp(l1 - norm);
    }

    // M-step: weights, then responsibility-weighted moments.
    const double n0 = std::accumulate(r0.begin(), r0.end(), 0.0);
    const double n1 = std::accumulate(r1.begin(), r1.end(), 0.0);
    const double next_pi = clamp_pi(n1 / n);

    auto matched = [&](const std::vector<double>& r, double nk, double a, double b) {
      if (nk < 1e-12) return std::pair<double, double>{a, b};
      double mean = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) mean += r[i] * x[i];
      mean /= nk;
      double var = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) var += r[i] * (x[i] - mean) * (x[i] - mean);
      var /= nk;
      return moment_match(mean, var);
    };
    const auto [na0, nb0] = matched(r0, n0, shapes.a0, shapes.b0);
    const auto [na1, nb1] = matched(r1, n1, shapes.a1, shapes.b1);
    Shapes proposal{na0, nb0, na1, nb1};

    double next_ll = log_likelihood(with_shapes(next_pi, proposal), x);
    if (!(next_ll >= current_ll)) {
      // Moment matching is not a likelihood maximizer; fall back toward the old shapes.
      ++trace.damped_steps;
      bool accepted = false;
      double step = 0.5;
      for (int halving = 0; halving < 30 && !accepted; ++halving, step *= 0.5) {
        Shapes damped{shapes.a0 + step * (proposal.a0 - shapes.a0),
                      shapes.b0 + step * (proposal.b0 - shapes.b0),
                      shapes.a1 + step * (proposal.a1 - shapes.a1),
                      shapes.b1 + step * (proposal.b1 - shapes.b1)};
        const double ll = log_likelihood(with_shapes(next_pi, damped), x);
        if (ll >= current_ll) {
          proposal = damped;
          next_ll = ll;
          accepted = true;
        }
      }
      if (!accepted) {
        proposal = shapes;
        next_ll = log_likelihood(with_shapes(next_pi, proposal), x);
      }
    }

    const double delta = std::max({std::abs(next_pi - pi), std::abs(proposal.a0 - shapes.a0),
                                   std::abs(proposal.b0 - shapes.b0),
                                   std::abs(proposal.a1 - shapes.a1),
                                   std::abs(proposal.b1 - shapes.b1)});
    pi = next_pi;
    shapes = proposal;
    current_ll = next_ll;
    trace.log_likelihoods.push_back(current_ll);
    trace.iterations = it + 1;
    if (delta < kConvergenceDelta) break;
  }

  BetaMixture m = with_shapes(pi, shapes);
  if (m.mean1() < m.mean0()) {
    m = {clamp_pi(1.0 - pi), shapes.a1, shapes.b1, shapes.a0, shapes.b0};
  }
  trace.mixture = m;
  return trace;
}

BetaMixture fit_beta_mixture(std::span<const double> x, int iterations) {
  return fit_beta_mixture_traced(x, iterations).mixture;
}

double gate(const BetaMixture& m, double x) {
  require_unit_interval(x);
  const double l1 = std::log(m.pi) + log_beta_unchecked(x, m.alpha1, m.beta1);
  const double l0 = std::log1p(-m.pi) + log_beta_unchecked(x, m.alpha0, m.beta0);
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

double low_posterior(const BetaMixture& m, double x) {
  require_unit_interval(x);
  const double l1 = std::log(m.pi) + log_beta_unchecked(x, m.alpha1, m.beta1);
  const double l0 = std::log1p(-m.pi) + log_beta_unchecked(x, m.alpha0, m.beta0);
  return 1.0 / (1.0 + std::exp(l1 - l0));
}

namespace {

// Indices of the k largest values, ties toward the lower index.
std::vector<int> top_indices(std::span<const double> values, int k) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  std::sort(order.begin(), order.end());
  return order;
}

int argmax_over(std::span<const double> values, const std::vector<int>& indices) {
  int best = indices.front();
  for (int i : indices) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

GateDecision decide_fusion(std::span<const double> scores, const GateParams& params) {
  if (!(params.threshold > 0.0 && params.threshold < 1.0)) {
    throw InvalidArgument("gate threshold must lie in (0,1)");
  }
  if (params.min_keep < 1) throw InvalidArgument("min_keep must be >= 1");

  GateDecision decision;
  if (scores.empty()) return decision;

  const auto x = normalize_scores(scores, params.epsilon);
  const bool constant = std::all_of(scores.begin(), scores.end(),
                                    [&](double s) { return s == scores.front(); });
  if (scores.size() < 2 || constant) {
    decision.gates.assign(scores.size(), 0.5);
    decision.retained = top_indices(x, params.min_keep);
  } else {
    const auto mixture = fit_beta_mixture(x, params.em_iters);
    decision.mixture = mixture;
    decision.gates.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = gate(mixture, x[i]);
      decision.gates.push_back(g);
      if (g >= params.threshold) decision.retained.push_back(static_cast<int>(i));
    }
    if (decision.retained.size() < static_cast<std::size_t>(params.min_keep)) {
      decision.retained = top_indices(x, params.min_keep);
    }
  }

  if (decision.retained.empty()) return decision;
  const int target = argmax_over(x, decision.retained);
  decision.preferred = target;
  if (scores[target] >= params.new_session_floor) decision.merge_target = target;
  return decision;
}

GateDecision decide_by_threshold(std::span<const double> scores, double threshold) {
  GateDecision decision;
  if (scores.empty()) return decision;
  int best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pass = scores[i] >= threshold;
    decision.gates.push_back(pass ? 1.0 : 0.0);
    if (pass) decision.retained.push_back(static_cast<int>(i));
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  decision.preferred = best;
  if (scores[best] >= threshold) decision.merge_target = best;
  return decision;
}

}  // namespace fluxmem::bmm
