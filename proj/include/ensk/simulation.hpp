#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ensk/search.hpp"
#include "ensk/types.hpp"

namespace ensk {

enum class TimeModel { ConditionalExponential, None };

struct PoolGeneratorSpec {
  std::size_t n = 30;
  double alpha_p = 17.0;
  double beta_p = 5.0;
  TimeModel time_model = TimeModel::ConditionalExponential;
  std::uint64_t seed = 0;
};

/// Accuracies i.i.d. Beta(alpha_p, beta_p); costs Exponential(rate 1 - p_i)
/// conditional on each accuracy (p numerically 1 is resampled). Deterministic
/// per seed.
Pool generate_pool(const PoolGeneratorSpec& spec);

/// Aggregates over the replicates of one (strategy, stopping mode) cell.
struct CellStats {
  double mean_energy = 0.0;
  double std_energy = 0.0;
  double mean_steps = 0.0;
  double mean_wall_seconds = 0.0;
  std::uint64_t stop_count = 0;
  std::uint64_t maxstep_count = 0;
  std::uint64_t exhausted_count = 0;
};

/// One search run inside an experiment, kept for the per-replicate CSV.
struct ReplicateRecord {
  std::size_t replicate = 0;
  std::string strategy;
  std::string mode;  // "stop" or "maxstep"
  double energy = 0.0;
  std::uint64_t steps = 0;
  std::string terminated_by;
  std::vector<std::pair<std::uint64_t, double>> trace;
};

struct ExperimentReport {
  std::string name;
  std::size_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::string> config;  // echo, stringified
  std::map<std::string, CellStats> cells;     // "<strategy>/<mode>"
  std::map<std::string, double> extra;        // experiment-specific scalars
  std::vector<ReplicateRecord> records;
};

struct Table2Config {
  std::size_t n = 30;
  double budget_fraction = 0.30;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  double alpha_p = 17.0;
  double beta_p = 5.0;
  std::uint64_t sherlock_maxstep_cap = 1000;
  std::uint64_t sa_maxstep_cap = 20000;
  SaSchedule sa;
};

/// Synthetic reproduction: per replicate draw a pool, set T as a fraction of
/// the total cost, derive the stop rule, then run SA and the efficiency
/// sampler with the stop threshold active ("stop") and disabled ("maxstep").
ExperimentReport run_table2_experiment(const Table2Config& config);

struct McVsSaConfig {
  std::size_t n = 15;
  double beta = 0.10;
  double epsilon = 0.05;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  std::uint64_t mc_steps = 2;     // plain MC gets a few draws per replicate
  std::uint64_t sa_steps = 6000;  // SA runs a full annealing schedule
  // Escaping the cheap-member local optimum needs a long hot phase.
  SaSchedule sa{1.0, 0.99, 20};
};

/// Adversarial pool D1 = (1-beta, T), D2..n = (1/2+eps, T/n). Counts how
/// often each strategy's result matches the exhaustive optimum. No stop
/// threshold: both run on fixed step budgets.
ExperimentReport run_mc_vs_sa_experiment(const McVsSaConfig& config);

struct OdConfig {
  double budget_fraction = 0.8;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  std::uint64_t maxstep_cap = 1'000'000'000ULL;
  SaSchedule sa;
};

/// Fixed 8-detector pool under the weighted (spatial) voting model: fits the
/// decision curve, derives the stop rule from the weighted moments, runs the
/// efficiency sampler and SA.
ExperimentReport run_od_experiment(const OdConfig& config);

/// The 8 detector (accuracy, cost) pairs; total cost 301.
Pool od_pool();
/// Empirical decision weights p_{8,k}, k = 0..8.
std::vector<double> od_weight_table();

}  // namespace ensk
