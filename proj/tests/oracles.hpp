#pragma once

// Test-only oracles, kept independent of the library paths they check.

#include <cmath>
#include <vector>

#include "ensk/rng.hpp"

namespace ensk::testing {

/// Cheng's BB rejection sampler for Beta(a, b) with min(a, b) > 1.
/// Independent of the library's inverse-cdf sampling path.
inline double cheng_beta(Rng& rng, double aa, double bb) {
  const double a = std::min(aa, bb);
  const double b = std::max(aa, bb);
  const double alpha = a + b;
  const double beta = std::sqrt((alpha - 2.0) / (2.0 * a * b - alpha));
  const double gamma = a + 1.0 / beta;
  double w = 0.0;
  while (true) {
    const double u1 = rng.uniform_open();
    const double u2 = rng.uniform_open();
    const double v = beta * std::log(u1 / (1.0 - u1));
    w = a * std::exp(v);
    const double z = u1 * u1 * u2;
    const double r = gamma * v - 1.3862943611198906;  // log 4
    const double s = a + r - w;
    if (s + 2.6094379124341003 >= 5.0 * z) break;  // 1 + log 5
    const double t = std::log(z);
    if (s >= t) break;
    if (r + alpha * std::log(alpha / (b + w)) >= t) break;
  }
  const double x = w / (b + w);
  return aa <= bb ? x : 1.0 - x;
}

/// Majority accuracy by direct outcome enumeration; quadratic-free reference
/// for small ensembles.
inline double enumerate_majority(const std::vector<double>& p) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::size_t correct = 0;
    double prob = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) {
        prob *= p[i];
        ++correct;
      } else {
        prob *= 1.0 - p[i];
      }
    }
    if (2 * correct > n) total += prob;
  }
  return total;
}

}  // namespace ensk::testing
