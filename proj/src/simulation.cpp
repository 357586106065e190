#include "ensk/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "ensk/energy_stats.hpp"
#include "ensk/rng.hpp"
#include "ensk/special_functions.hpp"
#include "ensk/voting_energy.hpp"

namespace ensk {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Static partition of [0, count) over a couple of workers; each slot is
/// written exactly once, so aggregation order never depends on scheduling.
template <typename Fn>
void parallel_replicates(std::size_t count, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

struct RunOutcome {
  double energy = 0.0;
  std::uint64_t steps = 0;
  TerminationCause cause = TerminationCause::Exhausted;
  double wall = 0.0;
  std::vector<std::pair<std::uint64_t, double>> trace;
};

RunOutcome to_outcome(const SearchResult& r) {
  return {r.best.energy(), r.steps_executed, r.terminated_by, r.wall_seconds, r.trace};
}

CellStats aggregate(const std::vector<RunOutcome>& runs) {
  CellStats s;
  if (runs.empty()) return s;
  double sum = 0.0;
  for (const auto& r : runs) {
    sum += r.energy;
    s.mean_steps += static_cast<double>(r.steps);
    s.mean_wall_seconds += r.wall;
    switch (r.cause) {
      case TerminationCause::StopThreshold: ++s.stop_count; break;
      case TerminationCause::MaxStep: ++s.maxstep_count; break;
      case TerminationCause::Exhausted: ++s.exhausted_count; break;
    }
  }
  const double n = static_cast<double>(runs.size());
  s.mean_energy = sum / n;
  s.mean_steps /= n;
  s.mean_wall_seconds /= n;
  if (runs.size() > 1) {
    double sq = 0.0;
    for (const auto& r : runs) sq += (r.energy - s.mean_energy) * (r.energy - s.mean_energy);
    s.std_energy = std::sqrt(sq / (n - 1.0));
  }
  return s;
}

void push_records(ExperimentReport& report, const std::vector<RunOutcome>& runs,
                  const std::string& strategy, const std::string& mode) {
  for (std::size_t r = 0; r < runs.size(); ++r) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.strategy = strategy;
    rec.mode = mode;
    rec.energy = runs[r].energy;
    rec.steps = runs[r].steps;
    rec.terminated_by = termination_name(runs[r].cause);
    rec.trace = runs[r].trace;
    report.records.push_back(std::move(rec));
  }
}

}  // namespace

Pool generate_pool(const PoolGeneratorSpec& spec) {
  if (spec.n < 1) throw Error(Errc::InvalidArgument, "pool size must be >= 1");
  if (!(spec.alpha_p > 0.0) || !(spec.beta_p > 0.0)) {
    throw Error(Errc::InvalidArgument, "beta parameters must be positive");
  }
  Rng rng(spec.seed);
  std::vector<Member> members;
  members.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double p = inv_reg_inc_beta(spec.alpha_p, spec.beta_p, rng.uniform_open());
    // Rate 1-p must stay positive for the conditional-exponential draw.
    while (p >= 1.0 - 1e-9) {
      p = inv_reg_inc_beta(spec.alpha_p, spec.beta_p, rng.uniform_open());
    }
    double cost = 1.0;
    if (spec.time_model == TimeModel::ConditionalExponential) {
      cost = -std::log(rng.uniform_open()) / (1.0 - p);
    }
    members.push_back({"m" + std::to_string(i + 1), p, cost});
  }
  return validate_pool(members);
}

ExperimentReport run_table2_experiment(const Table2Config& config) {
  if (config.replicates == 0) throw Error(Errc::InvalidArgument, "replicates must be >= 1");
  if (!(config.budget_fraction > 0.0 && config.budget_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument, "budget fraction must lie in (0,1]");
  }

  struct Slot {
    RunOutcome runs[4];  // sherlock/stop, sherlock/maxstep, sa/stop, sa/maxstep
    double stop_value = 0.0;
    unsigned ell_hat = 0;
  };
  std::vector<Slot> slots(config.replicates);

  parallel_replicates(config.replicates, [&](std::size_t r) {
    const std::uint64_t base = config.seed;
    PoolGeneratorSpec gen;
    gen.n = config.n;
    gen.alpha_p = config.alpha_p;
    gen.beta_p = config.beta_p;
    gen.time_model = TimeModel::ConditionalExponential;
    gen.seed = derive_seed(base, r * 16);
    const Pool pool = generate_pool(gen);
    const Budget budget(config.budget_fraction * pool.total_cost());
    const auto model = EnergyModel::plain_majority();

    const auto dist = fit_accuracy_distribution(pool.accuracies());
    const auto costs = pool.costs();
    // With T defined as a fraction of the total cost, the mean-cost rule is
    // the exact expected size (fraction * n) with no estimator variance; the
    // arrival-model estimate on a 30-sample fit scatters ell_hat by +-40%.
    StopRuleOptions options;
    options.estimator = SizeEstimator::MeanCost;
    const StopRule rule = derive_stop_rule(dist, pool.size(), budget, costs, options);
    slots[r].stop_value = rule.stop;
    slots[r].ell_hat = rule.derivation.ell_hat;

    auto run_cell = [&](Strategy strategy, bool use_stop, std::uint64_t cap, std::uint64_t stream) {
      SearchConfig sc;
      sc.strategy = strategy;
      sc.seed = derive_seed(base, r * 16 + stream);
      sc.stop_rule = rule;
      sc.stop_rule.maxstep = std::min(rule.maxstep, cap);
      sc.use_stop_threshold = use_stop;
      sc.sa = config.sa;
      sc.record_trace = true;
      return to_outcome(run_search(pool, budget, model, sc));
    };
    slots[r].runs[0] = run_cell(Strategy::Sherlock, true, config.sherlock_maxstep_cap, 1);
    slots[r].runs[1] = run_cell(Strategy::Sherlock, false, config.sherlock_maxstep_cap, 2);
    slots[r].runs[2] = run_cell(Strategy::SimulatedAnnealing, true, config.sa_maxstep_cap, 3);
    slots[r].runs[3] = run_cell(Strategy::SimulatedAnnealing, false, config.sa_maxstep_cap, 4);
  });

  ExperimentReport report;
  report.name = "table2-n" + std::to_string(config.n);
  report.replicates = config.replicates;
  report.master_seed = config.seed;
  report.config = {{"n", std::to_string(config.n)},
                   {"budget_fraction", fmt(config.budget_fraction)},
                   {"alpha_p", fmt(config.alpha_p)},
                   {"beta_p", fmt(config.beta_p)},
                   {"ell_estimator", "mean-cost"},
                   {"sherlock_maxstep_cap", std::to_string(config.sherlock_maxstep_cap)},
                   {"sa_maxstep_cap", std::to_string(config.sa_maxstep_cap)},
                   {"sa_initial_temp", fmt(config.sa.initial_temp)},
                   {"sa_cooling", fmt(config.sa.cooling)},
                   {"sa_iters_per_temp", std::to_string(config.sa.iters_per_temp)}};

  const char* cell_names[4] = {"sherlock/stop", "sherlock/maxstep", "sa/stop", "sa/maxstep"};
  for (int c = 0; c < 4; ++c) {
    std::vector<RunOutcome> runs;
    runs.reserve(config.replicates);
    for (const auto& slot : slots) runs.push_back(slot.runs[c]);
    report.cells[cell_names[c]] = aggregate(runs);
    const std::string strategy = c < 2 ? "sherlock" : "sa";
    const std::string mode = (c % 2 == 0) ? "stop" : "maxstep";
    push_records(report, runs, strategy, mode);
  }

  double mean_stop = 0.0, mean_ell = 0.0;
  for (const auto& slot : slots) {
    mean_stop += slot.stop_value;
    mean_ell += slot.ell_hat;
  }
  report.extra["mean_stop_threshold"] = mean_stop / static_cast<double>(config.replicates);
  report.extra["mean_ell_hat"] = mean_ell / static_cast<double>(config.replicates);
  return report;
}

ExperimentReport run_mc_vs_sa_experiment(const McVsSaConfig& config) {
  if (config.replicates == 0) throw Error(Errc::InvalidArgument, "replicates must be >= 1");
  if (!(config.beta > 0.0 && config.beta < 0.5) || !(config.epsilon > 0.0 && config.epsilon < 0.5)) {
    throw Error(Errc::InvalidArgument, "need 0 < beta < 1/2 and 0 < epsilon < 1/2");
  }
  if (config.n < 2) throw Error(Errc::InvalidArgument, "adversarial pool needs n >= 2");

  const double total = 1.0;  // budget scale is arbitrary
  std::vector<Member> members;
  members.push_back({"d1", 1.0 - config.beta, total});
  for (std::size_t i = 2; i <= config.n; ++i) {
    members.push_back({"d" + std::to_string(i), 0.5 + config.epsilon,
                       total / static_cast<double>(config.n)});
  }
  const Pool pool = validate_pool(members);
  const Budget budget(total);
  const auto model = EnergyModel::plain_majority();
  const Selection optimum = best_subset_exhaustive(pool, budget, model);

  struct Slot {
    RunOutcome mc, sa;
    bool mc_hit = false, sa_hit = false;
  };
  std::vector<Slot> slots(config.replicates);

  parallel_replicates(config.replicates, [&](std::size_t r) {
    auto run_one = [&](Strategy strategy, std::uint64_t steps, std::uint64_t stream) {
      SearchConfig sc;
      sc.strategy = strategy;
      sc.seed = derive_seed(config.seed, r * 16 + stream);
      sc.stop_rule = StopRule::manual(1.0, steps);
      sc.use_stop_threshold = false;  // fixed budgets; no stopping rule here
      sc.sa = config.sa;
      sc.record_trace = true;
      return to_outcome(run_search(pool, budget, model, sc));
    };
    slots[r].mc = run_one(Strategy::MonteCarlo, config.mc_steps, 1);
    slots[r].sa = run_one(Strategy::SimulatedAnnealing, config.sa_steps, 2);
    slots[r].mc_hit = std::abs(slots[r].mc.energy - optimum.energy()) <= 1e-9;
    slots[r].sa_hit = std::abs(slots[r].sa.energy - optimum.energy()) <= 1e-9;
  });

  ExperimentReport report;
  report.name = "mc-vs-sa";
  report.replicates = config.replicates;
  report.master_seed = config.seed;
  report.config = {{"n", std::to_string(config.n)},
                   {"beta", fmt(config.beta)},
                   {"epsilon", fmt(config.epsilon)},
                   {"mc_steps", std::to_string(config.mc_steps)},
                   {"sa_steps", std::to_string(config.sa_steps)}};

  std::vector<RunOutcome> mc_runs, sa_runs;
  std::size_t mc_hits = 0, sa_hits = 0;
  for (const auto& slot : slots) {
    mc_runs.push_back(slot.mc);
    sa_runs.push_back(slot.sa);
    mc_hits += slot.mc_hit ? 1 : 0;
    sa_hits += slot.sa_hit ? 1 : 0;
  }
  report.cells["monte-carlo/fixed"] = aggregate(mc_runs);
  report.cells["sa/fixed"] = aggregate(sa_runs);
  push_records(report, mc_runs, "monte-carlo", "fixed");
  push_records(report, sa_runs, "sa", "fixed");
  report.extra["mc_precision"] = static_cast<double>(mc_hits) / static_cast<double>(config.replicates);
  report.extra["sa_precision"] = static_cast<double>(sa_hits) / static_cast<double>(config.replicates);
  report.extra["optimum_energy"] = optimum.energy();
  report.extra["optimum_size"] = static_cast<double>(optimum.size());
  return report;
}

Pool od_pool() {
  return validate_pool({{"od1", 0.220, 31.0},
                        {"od2", 0.304, 38.0},
                        {"od3", 0.319, 34.0},
                        {"od4", 0.643, 69.0},
                        {"od5", 0.754, 11.0},
                        {"od6", 0.765, 7.0},
                        {"od7", 0.958, 21.0},
                        {"od8", 0.976, 90.0}});
}

std::vector<double> od_weight_table() {
  return {0.0, 0.11, 0.70, 0.93, 0.99, 1.00, 1.00, 1.00, 1.00};
}

ExperimentReport run_od_experiment(const OdConfig& config) {
  if (config.replicates == 0) throw Error(Errc::InvalidArgument, "replicates must be >= 1");
  if (!(config.budget_fraction > 0.0 && config.budget_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument, "budget fraction must lie in (0,1]");
  }

  const Pool pool = od_pool();
  const auto table = od_weight_table();
  const ConstraintCurve curve = fit_constraint_curve(table);
  const auto model = EnergyModel::constrained(table, curve);
  const Budget budget(config.budget_fraction * pool.total_cost());

  const auto dist = fit_accuracy_distribution(pool.accuracies());
  StopRuleOptions options;
  options.curve = curve;
  options.maxstep_cap = config.maxstep_cap;
  const auto costs = pool.costs();
  const StopRule rule = derive_stop_rule(dist, pool.size(), budget, costs, options);

  struct Slot {
    RunOutcome sherlock, sa;
  };
  std::vector<Slot> slots(config.replicates);
  parallel_replicates(config.replicates, [&](std::size_t r) {
    auto run_one = [&](Strategy strategy, std::uint64_t stream) {
      SearchConfig sc;
      sc.strategy = strategy;
      sc.seed = derive_seed(config.seed, r * 16 + stream);
      sc.stop_rule = rule;
      sc.sa = config.sa;
      sc.record_trace = true;
      return to_outcome(run_search(pool, budget, model, sc));
    };
    slots[r].sherlock = run_one(Strategy::Sherlock, 1);
    slots[r].sa = run_one(Strategy::SimulatedAnnealing, 2);
  });

  ExperimentReport report;
  report.name = "od";
  report.replicates = config.replicates;
  report.master_seed = config.seed;
  report.config = {{"budget_fraction", fmt(config.budget_fraction)},
                   {"maxstep_cap", std::to_string(config.maxstep_cap)}};

  std::vector<RunOutcome> sherlock_runs, sa_runs;
  for (const auto& slot : slots) {
    sherlock_runs.push_back(slot.sherlock);
    sa_runs.push_back(slot.sa);
  }
  report.cells["sherlock/stop"] = aggregate(sherlock_runs);
  report.cells["sa/stop"] = aggregate(sa_runs);
  push_records(report, sherlock_runs, "sherlock", "stop");
  push_records(report, sa_runs, "sa", "stop");

  report.extra["ell_hat"] = rule.derivation.ell_hat;
  report.extra["constrained_mean"] = rule.derivation.mu_q;
  report.extra["constrained_variance"] = rule.derivation.var_q;
  report.extra["curve_a"] = curve.a;
  report.extra["curve_b"] = curve.b;
  report.extra["stop_threshold"] = rule.stop;
  report.extra["oracle_energy"] = best_subset_exhaustive(pool, budget, model).energy();
  return report;
}

}  // namespace ensk
