#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>

namespace ensk {

/// log Gamma(x) for x > 0 (Lanczos approximation, reflection below 0.5).
double ln_gamma(double x);

/// log of the binomial coefficient C(n, k).
double ln_choose(double n, double k);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
/// Continued fraction with the symmetry switch at x > (a+1)/(a+b+2).
double reg_inc_beta(double a, double b, double x);

/// Inverse of reg_inc_beta in x: bracketed Newton with bisection fallback.
double inv_reg_inc_beta(double a, double b, double q);

/// Standard normal quantile function, |error| < 1e-9.
double normal_quantile(double q);

/// Kolmogorov-Smirnov sup distance between the empirical cdf of a sorted
/// sample (ascending, n >= 5) and the given cdf.
double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf);

/// Asymptotic KS critical value at significance 0.05.
inline double ks_critical_005(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

/// Upper tail P(X >= successes) for X ~ Binomial(trials, p).
double binomial_tail(std::uint64_t trials, std::uint64_t successes, double p);

}  // namespace ensk
