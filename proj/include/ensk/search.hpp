#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ensk/energy_stats.hpp"
#include "ensk/types.hpp"

namespace ensk {

enum class Strategy { GreedyForward, GreedyBackward, MonteCarlo, SimulatedAnnealing, Sherlock };
enum class GreedyKey { Accuracy, Usefulness };
enum class TerminationCause { StopThreshold, MaxStep, Exhausted };

const char* strategy_name(Strategy s);
const char* termination_name(TerminationCause c);
Strategy strategy_from_name(const std::string& name);

struct SaSchedule {
  double initial_temp = 1.0;
  double cooling = 0.95;
  unsigned iters_per_temp = 20;
};

struct SearchConfig {
  Strategy strategy = Strategy::Sherlock;
  GreedyKey key = GreedyKey::Accuracy;
  std::uint64_t seed = 0;
  StopRule stop_rule;
  bool use_stop_threshold = true;  // false: run to MaxStep (escape bound only)
  SaSchedule sa;
  bool literal_efficiency = false;  // printed full-binomial form (degenerate)
  bool record_trace = false;
};

struct SearchResult {
  Selection best;
  std::uint64_t steps_executed = 0;
  TerminationCause terminated_by = TerminationCause::Exhausted;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::uint64_t, double>> trace;  // (step, best-so-far)
};

/// Efficiency of one item against the remaining budget: the majority accuracy
/// of m = floor(remaining / t) copies of the item; 0 when it cannot fit.
/// literal = true reproduces the degenerate full-binomial sum (identically 1).
double item_efficiency(double p, double t, double remaining, bool literal = false);

/// Normalizes efficiencies into selection probabilities. Throws AllZero when
/// nothing is selectable.
std::vector<double> selection_distribution(std::span<const double> efficiencies);

SearchResult greedy_forward(const Pool& pool, const Budget& budget, const EnergyModel& model,
                            const SearchConfig& config);
SearchResult greedy_backward(const Pool& pool, const Budget& budget, const EnergyModel& model,
                             const SearchConfig& config);
SearchResult monte_carlo_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                                const SearchConfig& config);
SearchResult simulated_annealing(const Pool& pool, const Budget& budget, const EnergyModel& model,
                                 const SearchConfig& config);
SearchResult sherlock_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                             const SearchConfig& config);

SearchResult run_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                        const SearchConfig& config);

}  // namespace ensk
