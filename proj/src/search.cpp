#include "ensk/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ensk/rng.hpp"
#include "ensk/special_functions.hpp"
#include "ensk/voting_energy.hpp"

namespace ensk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_feasible(const Pool& pool, const Budget& budget) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].cost <= budget.total) return;
  }
  throw Error(Errc::NoFeasibleSubset, "every single member exceeds the budget");
}

double subset_energy(const Pool& pool, const EnergyModel& model,
                     const std::vector<std::size_t>& indices) {
  std::vector<double> accs;
  accs.reserve(indices.size());
  for (std::size_t i : indices) accs.push_back(pool[i].accuracy);
  return ensemble_energy(model, accs);
}

/// Tracks the best subset seen, records the trace, and owns the stop test.
struct BestTracker {
  explicit BestTracker(const SearchConfig& config)
      : stop(config.use_stop_threshold ? config.stop_rule.stop
                                       : std::numeric_limits<double>::infinity()),
        record_trace(config.record_trace) {}

  bool offer(const std::vector<std::size_t>& indices, double energy, std::uint64_t step) {
    if (!has_best || energy > best_energy) {
      best_energy = energy;
      best_indices = indices;
      has_best = true;
      if (record_trace) trace.emplace_back(step, energy);
    }
    return best_energy >= stop;
  }

  double stop;
  bool record_trace;
  bool has_best = false;
  double best_energy = 0.0;
  std::vector<std::size_t> best_indices;
  std::vector<std::pair<std::uint64_t, double>> trace;
};

SearchResult finish(const Pool& pool, const Budget& budget, const EnergyModel& model,
                    BestTracker& tracker, std::uint64_t steps, TerminationCause cause,
                    Clock::time_point t0) {
  if (!tracker.has_best) {
    // Degenerate pools (all-zero accuracy) can leave the tracker empty; fall
    // back to the cheapest feasible single member.
    std::size_t pick = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].cost <= budget.total && (pick == pool.size() || pool[i].cost < pool[pick].cost)) {
        pick = i;
      }
    }
    tracker.offer({pick}, subset_energy(pool, model, {pick}), steps);
  }
  SearchResult result;
  result.best = Selection::make(pool, model, tracker.best_indices);
  result.steps_executed = steps;
  result.terminated_by = cause;
  result.wall_seconds = seconds_since(t0);
  result.trace = std::move(tracker.trace);
  return result;
}

double greedy_key_value(const Member& m, GreedyKey key) {
  return key == GreedyKey::Accuracy ? m.accuracy : m.accuracy / m.cost;
}

/// Uniformly random maximal feasible subset: shuffle, then take while it fits.
std::vector<std::size_t> random_fill(const Pool& pool, const Budget& budget, Rng& rng,
                                     std::vector<std::size_t>& scratch) {
  scratch.resize(pool.size());
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = i;
  rng.shuffle(scratch);
  std::vector<std::size_t> subset;
  double remaining = budget.total;
  for (std::size_t i : scratch) {
    if (pool[i].cost <= remaining) {
      subset.push_back(i);
      remaining -= pool[i].cost;
    }
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

/// Memo for the per-item efficiency: (item, copies) pairs repeat heavily
/// across restarts.
class EfficiencyCache {
 public:
  explicit EfficiencyCache(bool literal) : literal_(literal) {}

  double get(std::size_t item, double p, std::uint64_t copies) {
    if (copies == 0) return literal_ ? 1.0 : 0.0;
    if (literal_) return 1.0;
    // Copy counts beyond 2^44 live deep in the saturated tail; folding them
    // into one key slot keeps the key collision-free for real pools.
    const std::uint64_t kCopyCap = (std::uint64_t{1} << 44) - 1;
    const std::uint64_t key =
        (static_cast<std::uint64_t>(item) << 44) | std::min(copies, kCopyCap);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double value = binomial_tail(copies, copies / 2 + 1, p);
    memo_.emplace(key, value);
    return value;
  }

 private:
  bool literal_;
  std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::GreedyForward: return "greedy-forward";
    case Strategy::GreedyBackward: return "greedy-backward";
    case Strategy::MonteCarlo: return "monte-carlo";
    case Strategy::SimulatedAnnealing: return "sa";
    case Strategy::Sherlock: return "sherlock";
  }
  return "?";
}

const char* termination_name(TerminationCause c) {
  switch (c) {
    case TerminationCause::StopThreshold: return "stop-threshold";
    case TerminationCause::MaxStep: return "max-step";
    case TerminationCause::Exhausted: return "exhausted";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "greedy-forward") return Strategy::GreedyForward;
  if (name == "greedy-backward") return Strategy::GreedyBackward;
  if (name == "monte-carlo" || name == "mc") return Strategy::MonteCarlo;
  if (name == "sa" || name == "simulated-annealing") return Strategy::SimulatedAnnealing;
  if (name == "sherlock") return Strategy::Sherlock;
  throw Error(Errc::InvalidArgument, "unknown strategy '" + name + "'");
}

double item_efficiency(double p, double t, double remaining, bool literal) {
  if (!(t > 0.0)) throw Error(Errc::DomainError, "cost must be positive");
  if (remaining < 0.0) throw Error(Errc::DomainError, "remaining budget must be >= 0");
  const double ratio = remaining / t;
  const std::uint64_t copies =
      ratio >= 1e18 ? std::uint64_t{1} << 60 : static_cast<std::uint64_t>(std::floor(ratio + 1e-12));
  if (literal) return 1.0;  // printed full-binomial sum; identically one
  if (copies == 0) return 0.0;
  return binomial_tail(copies, copies / 2 + 1, p);
}

std::vector<double> selection_distribution(std::span<const double> efficiencies) {
  double total = 0.0;
  for (double e : efficiencies) {
    if (e < 0.0) throw Error(Errc::InvalidArgument, "negative efficiency");
    total += e;
  }
  if (!(total > 0.0)) throw Error(Errc::AllZero, "no item has positive efficiency");
  std::vector<double> probs(efficiencies.begin(), efficiencies.end());
  for (double& p : probs) p /= total;
  return probs;
}

SearchResult greedy_forward(const Pool& pool, const Budget& budget, const EnergyModel& model,
                            const SearchConfig& config) {
  const auto t0 = Clock::now();
  require_feasible(pool, budget);
  BestTracker tracker(config);

  // Seed with the best feasible single member by key, lowest index on ties.
  std::size_t seed_idx = pool.size();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].cost > budget.total) continue;
    if (seed_idx == pool.size() ||
        greedy_key_value(pool[i], config.key) > greedy_key_value(pool[seed_idx], config.key)) {
      seed_idx = i;
    }
  }
  std::vector<std::size_t> current{seed_idx};
  std::vector<bool> in_set(pool.size(), false);
  in_set[seed_idx] = true;
  double cost = pool[seed_idx].cost;
  double energy = subset_energy(pool, model, current);
  std::uint64_t steps = 1;
  if (tracker.offer(current, energy, steps)) {
    return finish(pool, budget, model, tracker, steps, TerminationCause::StopThreshold, t0);
  }

  // Extend by the energy-maximizing pair of remaining members; pairs keep the
  // cardinality odd. Stop when no pair fits or none improves.
  while (true) {
    double best_pair_energy = energy;
    std::size_t best_i = pool.size(), best_j = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (in_set[i]) continue;
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        if (in_set[j]) continue;
        if (cost + pool[i].cost + pool[j].cost > budget.total) continue;
        auto candidate = current;
        candidate.push_back(i);
        candidate.push_back(j);
        const double e = subset_energy(pool, model, candidate);
        if (e > best_pair_energy) {
          best_pair_energy = e;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i == pool.size()) break;
    current.push_back(best_i);
    current.push_back(best_j);
    std::sort(current.begin(), current.end());
    in_set[best_i] = in_set[best_j] = true;
    cost += pool[best_i].cost + pool[best_j].cost;
    energy = best_pair_energy;
    ++steps;
    if (tracker.offer(current, energy, steps)) {
      return finish(pool, budget, model, tracker, steps, TerminationCause::StopThreshold, t0);
    }
  }
  return finish(pool, budget, model, tracker, steps, TerminationCause::Exhausted, t0);
}

SearchResult greedy_backward(const Pool& pool, const Budget& budget, const EnergyModel& model,
                             const SearchConfig& config) {
  const auto t0 = Clock::now();
  require_feasible(pool, budget);
  BestTracker tracker(config);

  std::vector<std::size_t> current(pool.size());
  for (std::size_t i = 0; i < current.size(); ++i) current[i] = i;
  double cost = pool.total_cost();
  std::uint64_t steps = 0;

  // Re-summed rather than decremented; see the annealer for the drift hazard.
  auto remove_at = [&](std::size_t pos) {
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(pos));
    cost = 0.0;
    for (std::size_t i : current) cost += pool[i].cost;
  };

  // Single removal choice: energy-maximizing remainder (Accuracy key) or the
  // least useful member (Usefulness key); lowest index on ties.
  auto pick_single = [&]() -> std::size_t {
    if (config.key == GreedyKey::Usefulness) {
      std::size_t worst = 0;
      for (std::size_t pos = 1; pos < current.size(); ++pos) {
        const double u = pool[current[pos]].accuracy / pool[current[pos]].cost;
        const double w = pool[current[worst]].accuracy / pool[current[worst]].cost;
        if (u < w) worst = pos;
      }
      return worst;
    }
    std::size_t best_pos = 0;
    double best_energy = -1.0;
    for (std::size_t pos = 0; pos < current.size(); ++pos) {
      auto candidate = current;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(pos));
      if (candidate.empty()) continue;
      const double e = subset_energy(pool, model, candidate);
      if (e > best_energy) {
        best_energy = e;
        best_pos = pos;
      }
    }
    return best_pos;
  };

  // Phase 1: restore feasibility one removal at a time.
  while (cost > budget.total && current.size() > 1) {
    remove_at(pick_single());
    ++steps;
  }
  if (cost > budget.total) {
    // Removal dead end: the survivor is infeasible even though some single
    // member fits. Fall back to the most accurate feasible single member.
    std::size_t pick = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].cost > budget.total) continue;
      if (pick == pool.size() || pool[i].accuracy > pool[pick].accuracy) pick = i;
    }
    current.assign(1, pick);
    cost = pool[pick].cost;
    ++steps;
  }

  // One more removal turns an even survivor odd; by the augmentation
  // inequality the best single removal never lowers the energy.
  if (current.size() % 2 == 0 && current.size() > 1) {
    remove_at(pick_single());
    ++steps;
  }

  double energy = subset_energy(pool, model, current);
  ++steps;
  if (tracker.offer(current, energy, steps)) {
    return finish(pool, budget, model, tracker, steps, TerminationCause::StopThreshold, t0);
  }

  // Phase 2: remove pairs while that improves the energy.
  while (current.size() >= 3) {
    double best_energy = energy;
    std::size_t best_a = current.size(), best_b = current.size();
    if (config.key == GreedyKey::Usefulness) {
      // Two least useful members.
      std::vector<std::size_t> order(current.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const double ux = pool[current[x]].accuracy / pool[current[x]].cost;
        const double uy = pool[current[y]].accuracy / pool[current[y]].cost;
        if (ux != uy) return ux < uy;
        return current[x] < current[y];
      });
      auto candidate = current;
      const std::size_t a = std::max(order[0], order[1]);
      const std::size_t b = std::min(order[0], order[1]);
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(a));
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(b));
      const double e = subset_energy(pool, model, candidate);
      if (e > best_energy) {
        best_energy = e;
        best_a = a;
        best_b = b;
      }
    } else {
      for (std::size_t x = 0; x < current.size(); ++x) {
        for (std::size_t y = x + 1; y < current.size(); ++y) {
          auto candidate = current;
          candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(y));
          candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(x));
          const double e = subset_energy(pool, model, candidate);
          if (e > best_energy) {
            best_energy = e;
            best_a = y;
            best_b = x;
          }
        }
      }
    }
    if (best_a == current.size()) break;
    remove_at(best_a);
    remove_at(best_b);
    energy = best_energy;
    ++steps;
    if (tracker.offer(current, energy, steps)) {
      return finish(pool, budget, model, tracker, steps, TerminationCause::StopThreshold, t0);
    }
  }
  return finish(pool, budget, model, tracker, steps, TerminationCause::Exhausted, t0);
}

SearchResult monte_carlo_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                                const SearchConfig& config) {
  const auto t0 = Clock::now();
  require_feasible(pool, budget);
  BestTracker tracker(config);
  Rng rng(config.seed);
  std::vector<std::size_t> scratch;

  for (std::uint64_t step = 1; step <= config.stop_rule.maxstep; ++step) {
    const auto subset = random_fill(pool, budget, rng, scratch);
    const double energy = subset_energy(pool, model, subset);
    if (tracker.offer(subset, energy, step)) {
      return finish(pool, budget, model, tracker, step, TerminationCause::StopThreshold, t0);
    }
  }
  return finish(pool, budget, model, tracker, config.stop_rule.maxstep, TerminationCause::MaxStep,
                t0);
}

SearchResult simulated_annealing(const Pool& pool, const Budget& budget, const EnergyModel& model,
                                 const SearchConfig& config) {
  const auto t0 = Clock::now();
  require_feasible(pool, budget);
  BestTracker tracker(config);
  Rng rng(config.seed);
  std::vector<std::size_t> scratch;

  std::vector<std::size_t> state = random_fill(pool, budget, rng, scratch);
  std::vector<bool> in_set(pool.size(), false);
  for (std::size_t i : state) in_set[i] = true;
  // Costs are always re-summed from scratch: incremental updates drift by
  // ulps and can make a member whose cost equals the whole budget unfittable
  // from the empty state.
  auto sum_cost = [&](const std::vector<std::size_t>& subset) {
    double c = 0.0;
    for (std::size_t i : subset) c += pool[i].cost;
    return c;
  };
  double cost = sum_cost(state);
  double energy = subset_energy(pool, model, state);
  if (tracker.offer(state, energy, 0)) {
    return finish(pool, budget, model, tracker, 0, TerminationCause::StopThreshold, t0);
  }

  const double t_init = config.sa.initial_temp;
  const double cooling = config.sa.cooling;
  const unsigned per_temp = std::max(1u, config.sa.iters_per_temp);

  auto eval_with = [&](std::vector<std::size_t> candidate) {
    std::sort(candidate.begin(), candidate.end());
    return candidate.empty() ? 0.0 : subset_energy(pool, model, candidate);
  };

  for (std::uint64_t step = 1; step <= config.stop_rule.maxstep; ++step) {
    const double temp =
        t_init * std::pow(cooling, static_cast<double>((step - 1) / per_temp));

    // Propose: 0 add, 1 remove, 2 swap. Infeasible proposals are no-ops.
    std::vector<std::size_t> candidate;
    const std::uint64_t move = rng.below(3);
    bool have_candidate = false;
    if (move == 0) {
      std::vector<std::size_t> addable;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!in_set[i] && pool[i].cost <= budget.total - cost) addable.push_back(i);
      }
      if (!addable.empty()) {
        const std::size_t pick = addable[rng.below(addable.size())];
        candidate = state;
        candidate.push_back(pick);
        have_candidate = true;
      }
    } else if (move == 1) {
      if (!state.empty()) {
        const std::size_t pos = rng.below(state.size());
        candidate = state;
        candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(pos));
        have_candidate = true;
      }
    } else {
      if (!state.empty()) {
        const std::size_t pos = rng.below(state.size());
        std::vector<std::size_t> rest = state;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
        const double freed = sum_cost(rest);
        std::vector<std::size_t> swappable;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (!in_set[i] && pool[i].cost <= budget.total - freed) swappable.push_back(i);
        }
        if (!swappable.empty()) {
          const std::size_t pick = swappable[rng.below(swappable.size())];
          candidate = std::move(rest);
          candidate.push_back(pick);
          have_candidate = true;
        }
      }
    }

    if (have_candidate) {
      const double cand_energy = eval_with(candidate);
      const double delta = cand_energy - energy;
      const bool accept = delta > 0.0 || rng.uniform() < std::exp(delta / std::max(temp, 1e-300));
      if (accept) {
        std::sort(candidate.begin(), candidate.end());
        for (std::size_t i : state) in_set[i] = false;
        for (std::size_t i : candidate) in_set[i] = true;
        state = std::move(candidate);
        cost = sum_cost(state);
        energy = cand_energy;
        if (!state.empty() && tracker.offer(state, energy, step)) {
          return finish(pool, budget, model, tracker, step, TerminationCause::StopThreshold, t0);
        }
      }
    }
  }
  return finish(pool, budget, model, tracker, config.stop_rule.maxstep, TerminationCause::MaxStep,
                t0);
}

SearchResult sherlock_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                             const SearchConfig& config) {
  const auto t0 = Clock::now();
  require_feasible(pool, budget);
  BestTracker tracker(config);
  Rng rng(config.seed);
  EfficiencyCache cache(config.literal_efficiency);
  const std::size_t n = pool.size();

  std::vector<std::size_t> candidates;  // members still outside the ensemble
  std::vector<double> effs;
  std::vector<std::size_t> ensemble;

  for (std::uint64_t step = 1; step <= config.stop_rule.maxstep; ++step) {
    candidates.resize(n);
    for (std::size_t i = 0; i < n; ++i) candidates[i] = i;
    ensemble.clear();
    double remaining = budget.total;

    while (true) {
      bool any_fits = false;
      for (std::size_t i : candidates) {
        if (pool[i].cost <= remaining) {
          any_fits = true;
          break;
        }
      }
      if (!any_fits) break;

      effs.resize(candidates.size());
      double total_eff = 0.0;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const std::size_t i = candidates[c];
        const double ratio = remaining / pool[i].cost;
        const std::uint64_t copies =
            ratio >= 1e18 ? std::uint64_t{1} << 60
                          : static_cast<std::uint64_t>(std::floor(ratio + 1e-12));
        effs[c] = cache.get(i, pool[i].accuracy, copies);
        total_eff += effs[c];
      }
      if (!(total_eff > 0.0)) break;  // nothing selectable (all fitting members useless)

      const std::size_t pick_pos = rng.categorical(effs);
      const std::size_t pick = candidates[pick_pos];
      if (pool[pick].cost <= remaining) {
        ensemble.push_back(pick);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick_pos));
        remaining -= pool[pick].cost;
        if (ensemble.size() % 2 == 1) {
          const double energy = subset_energy(pool, model, ensemble);
          if (tracker.offer(ensemble, energy, step)) {
            return finish(pool, budget, model, tracker, step, TerminationCause::StopThreshold, t0);
          }
        }
      }
      // A sampled member that does not fit is simply not admitted (possible
      // only in the literal-efficiency mode, where weights ignore the budget).
    }
  }
  return finish(pool, budget, model, tracker, config.stop_rule.maxstep, TerminationCause::MaxStep,
                t0);
}

SearchResult run_search(const Pool& pool, const Budget& budget, const EnergyModel& model,
                        const SearchConfig& config) {
  switch (config.strategy) {
    case Strategy::GreedyForward: return greedy_forward(pool, budget, model, config);
    case Strategy::GreedyBackward: return greedy_backward(pool, budget, model, config);
    case Strategy::MonteCarlo: return monte_carlo_search(pool, budget, model, config);
    case Strategy::SimulatedAnnealing: return simulated_annealing(pool, budget, model, config);
    case Strategy::Sherlock: return sherlock_search(pool, budget, model, config);
  }
  throw Error(Errc::InvalidArgument, "unknown strategy");
}

}  // namespace ensk
