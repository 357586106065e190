#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "ensk/types.hpp"

namespace ensk {

/// Distribution model for the member accuracies: a moment-matched beta fit
/// when the sample supports it, empirical moments otherwise.
struct AccuracyDistribution {
  enum class Source { BetaFit, Empirical };

  Source source = Source::Empirical;
  double alpha = 0.0;  // valid when source == BetaFit
  double beta = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t sample_size = 0;
  double ks_stat = 0.0;      // distance of the sample against the fitted beta
  double ks_critical = 0.0;  // 0 when the KS gate was not applicable
};

AccuracyDistribution fit_accuracy_distribution(std::span<const double> accuracies,
                                               double significance = 0.05);

/// Expected ensemble accuracy for ell i.i.d. members with mean accuracy mu_p:
/// binomial upper tail from floor(ell/2)+1.
double mean_q(double mu_p, unsigned ell);

/// Exact variance of the ensemble accuracy over pools of ell i.i.d. members
/// with moments (mu_p, var_p). Triple sum over overlap configurations with
/// s_T = var+mu^2, s_F = var+(1-mu)^2, s_TF = mu(1-mu)-var.
double var_q(double mu_p, double var_p, unsigned ell);

/// Curve value F(x) = b / (b + (x/(1-x))^a); endpoints by continuity.
double eval_constraint_curve(const ConstraintCurve& curve, double x);

/// Weighted-majority analogues of mean_q / var_q with weights F(k/ell).
double constrained_mean_q(const ConstraintCurve& curve, double mu_p, unsigned ell);
double constrained_var_q(const ConstraintCurve& curve, double mu_p, double var_p, unsigned ell);

/// Generic weighted forms (weights.size() == ell+1).
double weighted_mean_q(std::span<const double> weights, double mu_p);
double weighted_var_q(std::span<const double> weights, double mu_p, double var_p);

/// Least-squares fit of F in transformed space over the table's interior
/// entries: ln(1/F - 1) = a ln(x/(1-x)) - ln b at x = k/ell. Needs >= 3
/// interior points with 0 < w < 1.
ConstraintCurve fit_constraint_curve(std::span<const double> weights);

/// Expected members admitted per unit time under the conditional-exponential
/// cost model with accuracy ~ Beta(alpha, beta). Primary constant feeds
/// estimate_ell_beta; the alternative is exposed for inspection only.
double arrival_rate_primary(double alpha_p, double beta_p);      // (beta-1)/(alpha+beta-1)
double arrival_rate_alternative(double alpha_p, double beta_p);  // beta/(alpha+beta)

/// ceil(T * (beta-1)/(alpha+beta-1)), at least 1. Requires beta_p > 1.
unsigned estimate_ell_beta(double alpha_p, double beta_p, double budget_total);

/// ceil(T / mean cost), clamped to [1, n].
unsigned estimate_ell_mean_cost(std::span<const double> costs, double budget_total);

/// ceil(T/sum_t + 0.5 + 1.64 sqrt(T/sum_t)), clamped to [1, n]. Alternative
/// estimator; reported but not used by default.
unsigned estimate_ell_poisson_quantile(std::span<const double> costs, double budget_total);

/// Moment inversion for a beta model of the ensemble accuracy. Requires
/// 0 < mu < 1 and 0 < var < mu(1-mu), else DegenerateVariance.
std::pair<double, double> q_beta_params(double mu_q, double var_q);

/// Interior beta mode nu = (a-1)/(a+b-2) and Pearson first skewness
/// gamma = (1-nu)/sigma. Requires a > 1, b > 1, sigma > 0.
std::pair<double, double> mode_and_skewness(double alpha_q, double beta_q, double sigma_q);

/// Stopping probability as a step function of the skewness coefficient.
double stop_probability(double gamma);

enum class StopBranch { Beta, Normal, Manual };
enum class SizeEstimator { FullPool, BetaArrival, MeanCost, PoissonQuantile };

const char* stop_branch_name(StopBranch b);
const char* size_estimator_name(SizeEstimator e);

struct StopRuleDerivation {
  StopBranch branch = StopBranch::Manual;
  SizeEstimator estimator = SizeEstimator::FullPool;
  unsigned ell_hat = 1;
  double mu_q = 0.0;
  double var_q = 0.0;
  bool constrained = false;      // moments taken from a weighted model
  bool maxstep_stirling = false; // Stirling approximation vs exact binomial
  // Populated on the beta branch only.
  double alpha_q = 0.0;
  double beta_q = 0.0;
  double mode = 0.0;
  double skewness = 0.0;
  double stop_prob = 0.0;
};

struct StopRule {
  double stop = 1.0;
  std::uint64_t maxstep = 1000;
  StopRuleDerivation derivation;

  static StopRule manual(double stop, std::uint64_t maxstep);
};

struct StopRuleOptions {
  /// Weighted model whose moments replace the plain ones (e.g. spatial
  /// decision weights); affects mu_q / var_q only.
  std::optional<ConstraintCurve> curve;
  /// Force a particular size estimator instead of the source-driven default.
  std::optional<SizeEstimator> estimator;
  /// Upper bound applied after the Stirling/exact computation.
  std::uint64_t maxstep_cap = 1'000'000'000ULL;
};

/// Derivation chain: size estimate -> (mu_q, var_q) -> beta-or-normal branch
/// -> stop threshold, plus the restart bound. Deterministic.
StopRule derive_stop_rule(const AccuracyDistribution& dist, std::size_t pool_size,
                          const std::optional<Budget>& budget, std::span<const double> costs,
                          const StopRuleOptions& options = {});

/// Restart bound C(n, ell) with Stirling shortcut when ell/n <= 0.25;
/// floored at 1000, capped at cap.
std::uint64_t maxstep_bound(std::size_t n, unsigned ell, std::uint64_t cap, bool* used_stirling);

}  // namespace ensk
