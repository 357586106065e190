#include "ensk/voting_energy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ensk/errors.hpp"

namespace ensk {

namespace {

// Neumaier variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

double weighted_pmf_sum(std::span<const double> pmf, std::span<const double> weights) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (weights[k] != 0.0) acc.add(weights[k] * pmf[k]);
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

}  // namespace

std::vector<double> success_count_pmf(std::span<const double> accuracies) {
  if (accuracies.empty()) throw Error(Errc::EmptyInput, "success_count_pmf on empty list");
  std::vector<double> pmf(accuracies.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t filled = 0;
  for (double p : accuracies) {
    ++filled;
    pmf[filled] = pmf[filled - 1] * p;
    for (std::size_t k = filled - 1; k > 0; --k) {
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    }
    pmf[0] *= (1.0 - p);
  }
  return pmf;
}

double majority_accuracy(std::span<const double> accuracies) {
  const auto pmf = success_count_pmf(accuracies);
  const std::size_t ell = accuracies.size();
  CompensatedSum acc;
  for (std::size_t k = ell / 2 + 1; k <= ell; ++k) acc.add(pmf[k]);
  return std::clamp(acc.value(), 0.0, 1.0);
}

double constrained_accuracy(std::span<const double> accuracies, std::span<const double> weights) {
  if (accuracies.empty()) throw Error(Errc::EmptyInput, "constrained_accuracy on empty list");
  if (weights.size() != accuracies.size() + 1) {
    throw Error(Errc::WeightsLengthMismatch, "need ell+1 weights");
  }
  check_weight_table(weights);
  const auto pmf = success_count_pmf(accuracies);
  return weighted_pmf_sum(pmf, weights);
}

double ensemble_energy(const EnergyModel& model, std::span<const double> accuracies) {
  if (model.is_plain()) return majority_accuracy(accuracies);
  const auto weights = model.weights_for(accuracies.size());
  const auto pmf = success_count_pmf(accuracies);
  return weighted_pmf_sum(pmf, weights);
}

double brute_force_accuracy(std::span<const double> accuracies, const EnergyModel& model) {
  if (accuracies.empty()) throw Error(Errc::EmptyInput, "brute_force_accuracy on empty list");
  const std::size_t ell = accuracies.size();
  if (ell > 25) throw Error(Errc::TooLarge, "brute force limited to ell <= 25");
  const auto weights = model.weights_for(ell);
  CompensatedSum acc;
  for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
    const unsigned correct = std::popcount(mask);
    if (weights[correct] == 0.0) continue;
    double prob = 1.0;
    for (std::size_t i = 0; i < ell; ++i) {
      prob *= (mask >> i) & 1u ? accuracies[i] : 1.0 - accuracies[i];
    }
    acc.add(weights[correct] * prob);
  }
  return acc.value();
}

Selection best_subset_exhaustive(const Pool& pool, const Budget& budget,
                                 const EnergyModel& model) {
  const std::size_t n = pool.size();
  if (n > 22) throw Error(Errc::TooLarge, "exhaustive search limited to n <= 22");

  bool any_fits = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (pool[i].cost <= budget.total) any_fits = true;
  }
  if (!any_fits) throw Error(Errc::NoFeasibleSubset, "every single member exceeds the budget");

  double best_energy = -1.0;
  std::uint32_t best_mask = 0;
  std::size_t best_card = 0;
  std::vector<double> accs;
  accs.reserve(n);

  auto lex_less = [&](std::uint32_t lhs, std::uint32_t rhs) {
    // Compare index sets {i : bit i set} lexicographically.
    for (std::size_t i = 0; i < n; ++i) {
      const bool a = (lhs >> i) & 1u;
      const bool b = (rhs >> i) & 1u;
      if (a != b) return a;  // member i present only in lhs -> lhs smaller
    }
    return false;
  };

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) cost += pool[i].cost;
    }
    if (cost > budget.total) continue;

    accs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) accs.push_back(pool[i].accuracy);
    }
    const double energy = ensemble_energy(model, accs);
    const std::size_t card = accs.size();
    const bool better =
        energy > best_energy ||
        (energy == best_energy &&
         (card < best_card || (card == best_card && lex_less(mask, best_mask))));
    if (better) {
      best_energy = energy;
      best_mask = mask;
      best_card = card;
    }
  }

  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < n; ++i) {
    if ((best_mask >> i) & 1u) indices.push_back(i);
  }
  return Selection::make(pool, model, std::move(indices));
}

}  // namespace ensk
