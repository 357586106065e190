#pragma once

#include <span>
#include <vector>

#include "ensk/types.hpp"

namespace ensk {

/// P(exactly k of the members vote correctly), k = 0..ell. Computed by the
/// O(ell^2) convolution recurrence, exact for independent members.
std::vector<double> success_count_pmf(std::span<const double> accuracies);

/// Plain majority-voting ensemble accuracy: upper pmf tail from floor(ell/2)+1.
/// Ties at even ell count as failure.
double majority_accuracy(std::span<const double> accuracies);

/// Weighted variant: sum_k weights[k] * pmf[k]. weights must have length
/// ell+1 and be nondecreasing in k.
double constrained_accuracy(std::span<const double> accuracies, std::span<const double> weights);

/// Dispatch on the model kind.
double ensemble_energy(const EnergyModel& model, std::span<const double> accuracies);

/// Oracle: enumerates all 2^ell vote outcomes. ell <= 25.
double brute_force_accuracy(std::span<const double> accuracies, const EnergyModel& model);

/// Ground-truth optimum: enumerates every feasible subset (n <= 22). Ties are
/// broken by smaller cardinality, then lexicographically smallest index set.
Selection best_subset_exhaustive(const Pool& pool, const Budget& budget, const EnergyModel& model);

}  // namespace ensk
