#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ensk/csv.hpp"
#include "ensk/document.hpp"
#include "ensk/energy_stats.hpp"
#include "ensk/search.hpp"
#include "ensk/simulation.hpp"
#include "ensk/special_functions.hpp"
#include "ensk/voting_energy.hpp"

namespace {

using ensk::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTooLarge = 4;

int exit_code_for(const ensk::Error& e) {
  switch (e.code()) {
    case ensk::Errc::NoFeasibleSubset: return kExitInfeasible;
    case ensk::Errc::TooLarge: return kExitTooLarge;
    default: return kExitInput;
  }
}

void emit(const Json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ensk::Error(ensk::Errc::InvalidArgument, "cannot write '" + out_path + "'");
  out << doc.dump(2) << "\n";
}

struct ModelFlags {
  std::string model = "plain";
  std::string weights_path;
};

struct LoadedModel {
  ensk::EnergyModel model = ensk::EnergyModel::plain_majority();
  std::optional<ensk::ConstraintCurve> curve;
};

LoadedModel load_model(const ModelFlags& flags) {
  LoadedModel out;
  if (flags.model == "plain") {
    if (!flags.weights_path.empty()) {
      throw ensk::Error(ensk::Errc::InvalidArgument, "--weights requires --model constrained");
    }
    return out;
  }
  if (flags.model != "constrained") {
    throw ensk::Error(ensk::Errc::InvalidArgument, "--model must be plain or constrained");
  }
  if (flags.weights_path.empty()) {
    throw ensk::Error(ensk::Errc::InvalidArgument, "--model constrained requires --weights");
  }
  auto table = ensk::read_weights_csv_file(flags.weights_path);
  ensk::check_weight_table(table);
  // The fitted curve extends the table to other ensemble sizes; without
  // enough interior entries the model stays table-only.
  std::optional<ensk::ConstraintCurve> curve;
  try {
    curve = ensk::fit_constraint_curve(table);
  } catch (const ensk::Error& e) {
    if (e.code() != ensk::Errc::TooFewInteriorPoints) throw;
    std::cerr << "note: weight table has too few interior points for a curve fit; "
                 "only ensembles of size " << table.size() - 1 << " can be evaluated\n";
  }
  out.model = ensk::EnergyModel::constrained(std::move(table), curve);
  out.curve = curve;
  return out;
}

std::optional<ensk::SizeEstimator> parse_estimator(const std::string& name) {
  if (name.empty() || name == "auto") return std::nullopt;
  if (name == "beta") return ensk::SizeEstimator::BetaArrival;
  if (name == "mean-cost") return ensk::SizeEstimator::MeanCost;
  if (name == "poisson-quantile") return ensk::SizeEstimator::PoissonQuantile;
  throw ensk::Error(ensk::Errc::InvalidArgument,
                    "--ell-estimator must be auto|beta|mean-cost|poisson-quantile");
}

ensk::StopRule derive_rule_for_pool(const ensk::Pool& pool, std::optional<ensk::Budget> budget,
                                    const std::optional<ensk::ConstraintCurve>& curve,
                                    const std::string& estimator, std::uint64_t maxstep_cap) {
  if (pool.size() < 2) {
    // Too small for the statistical chain; fall back to an escape bound only.
    return ensk::StopRule::manual(1.0, std::min<std::uint64_t>(1000, maxstep_cap));
  }
  const auto dist = ensk::fit_accuracy_distribution(pool.accuracies());
  ensk::StopRuleOptions options;
  options.curve = curve;
  options.estimator = parse_estimator(estimator);
  options.maxstep_cap = maxstep_cap;
  const auto costs = pool.costs();
  return ensk::derive_stop_rule(dist, pool.size(), budget, costs, options);
}

Json distribution_to_json(const ensk::AccuracyDistribution& dist) {
  Json j;
  j["source"] = dist.source == ensk::AccuracyDistribution::Source::BetaFit ? "beta-fit"
                                                                           : "empirical";
  j["mean"] = dist.mean;
  j["variance"] = dist.variance;
  j["sample_size"] = dist.sample_size;
  if (dist.ks_critical > 0.0) {
    j["ks_stat"] = dist.ks_stat;
    j["ks_critical"] = dist.ks_critical;
  }
  if (dist.source == ensk::AccuracyDistribution::Source::BetaFit) {
    j["alpha"] = dist.alpha;
    j["beta"] = dist.beta;
  }
  return j;
}

int cmd_solve(const std::string& pool_path, double budget_value, const std::string& strategy,
              const std::string& key, std::uint64_t seed, const ModelFlags& model_flags,
              const std::string& estimator, std::uint64_t maxstep_cap, bool trace,
              bool literal_eq5, const std::string& out_path) {
  const auto pool = ensk::read_pool_csv_file(pool_path);
  const ensk::Budget budget(budget_value);
  const auto loaded = load_model(model_flags);

  ensk::SearchConfig config;
  config.strategy = ensk::strategy_from_name(strategy);
  config.key = key == "usefulness" ? ensk::GreedyKey::Usefulness : ensk::GreedyKey::Accuracy;
  config.seed = seed;
  config.stop_rule = derive_rule_for_pool(pool, budget, loaded.curve, estimator, maxstep_cap);
  config.record_trace = trace;
  config.literal_efficiency = literal_eq5;

  const auto result = ensk::run_search(pool, budget, loaded.model, config);

  std::map<std::string, Json> inputs{{"pool_file", pool_path},
                                     {"budget", budget.total},
                                     {"strategy", strategy},
                                     {"key", key},
                                     {"model", model_flags.model},
                                     {"seed", seed},
                                     {"literal_eq5", literal_eq5}};
  if (!model_flags.weights_path.empty()) inputs["weights_file"] = model_flags.weights_path;
  emit(ensk::make_result_document(inputs, pool, config.stop_rule, result), out_path);
  return kExitOk;
}

int cmd_stats(const std::string& pool_path, std::optional<double> budget_value,
              const ModelFlags& model_flags, std::uint64_t maxstep_cap,
              const std::string& out_path) {
  const auto pool = ensk::read_pool_csv_file(pool_path);
  const auto loaded = load_model(model_flags);
  const auto dist = ensk::fit_accuracy_distribution(pool.accuracies());
  const auto costs = pool.costs();

  std::optional<ensk::Budget> budget;
  if (budget_value) budget.emplace(*budget_value);

  Json doc;
  doc["tool"] = Json{{"name", ensk::kToolName}, {"version", ensk::kToolVersion}};
  doc["inputs"] = Json{{"pool_file", pool_path},
                       {"budget", budget ? Json(budget->total) : Json(nullptr)},
                       {"model", model_flags.model}};
  doc["accuracy_distribution"] = distribution_to_json(dist);

  Json ells;
  if (budget) {
    if (dist.source == ensk::AccuracyDistribution::Source::BetaFit && dist.beta > 1.0) {
      ells["beta"] = ensk::estimate_ell_beta(dist.alpha, dist.beta, budget->total);
    } else {
      ells["beta"] = "n/a (no beta fit with beta_p > 1)";
    }
    ells["mean_cost"] = ensk::estimate_ell_mean_cost(costs, budget->total);
    ells["poisson_quantile"] = ensk::estimate_ell_poisson_quantile(costs, budget->total);
  } else {
    ells["full_pool"] = pool.size();
  }
  doc["ell_estimates"] = ells;

  ensk::StopRuleOptions options;
  options.curve = loaded.curve;
  options.maxstep_cap = maxstep_cap;
  const auto rule = ensk::derive_stop_rule(dist, pool.size(), budget, costs, options);
  doc["stop_rule"] = ensk::stop_rule_to_json(rule);
  emit(doc, out_path);
  return kExitOk;
}

int cmd_oracle(const std::string& pool_path, double budget_value, const ModelFlags& model_flags,
               const std::string& out_path) {
  const auto pool = ensk::read_pool_csv_file(pool_path);
  const ensk::Budget budget(budget_value);
  const auto loaded = load_model(model_flags);
  const auto best = ensk::best_subset_exhaustive(pool, budget, loaded.model);

  Json doc;
  doc["tool"] = Json{{"name", ensk::kToolName}, {"version", ensk::kToolVersion}};
  doc["inputs"] = Json{{"pool_file", pool_path},
                       {"budget", budget.total},
                       {"model", model_flags.model},
                       {"method", "exhaustive"}};
  doc["pool"] = Json{{"size", pool.size()}, {"total_cost", pool.total_cost()}};
  doc["result"] = Json{{"selection", ensk::selection_to_json(pool, best)}};
  emit(doc, out_path);
  return kExitOk;
}

int cmd_reproduce(const std::string& experiment, std::size_t replicates, std::uint64_t seed,
                  const std::string& out_dir) {
  ensk::ExperimentReport report;
  if (experiment == "table2-n30") {
    ensk::Table2Config config;
    config.n = 30;
    config.budget_fraction = 0.30;
    config.replicates = replicates;
    config.seed = seed;
    report = ensk::run_table2_experiment(config);
  } else if (experiment == "table2-n100") {
    ensk::Table2Config config;
    config.n = 100;
    config.budget_fraction = 0.20;
    config.replicates = replicates;
    config.seed = seed;
    report = ensk::run_table2_experiment(config);
  } else if (experiment == "mc-vs-sa") {
    ensk::McVsSaConfig config;
    config.replicates = replicates;
    config.seed = seed;
    report = ensk::run_mc_vs_sa_experiment(config);
  } else if (experiment == "od") {
    ensk::OdConfig config;
    config.replicates = replicates;
    config.seed = seed;
    report = ensk::run_od_experiment(config);
  } else {
    throw ensk::Error(ensk::Errc::InvalidArgument, "unknown experiment '" + experiment + "'");
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << ensk::experiment_report_to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "replicates.csv");
    ensk::write_replicates_csv(out, report);
  }
  {
    std::ofstream out(fs::path(out_dir) / "traces.csv");
    ensk::write_traces_csv(out, report);
  }
  std::cout << "wrote " << out_dir << "/report.json, replicates.csv, traces.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-constrained ensemble creation under majority voting"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "derive a stop rule and run a search strategy");
  std::string pool_path, out_path, strategy = "sherlock", key = "accuracy", estimator = "auto";
  double budget_value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t maxstep_cap = 1'000'000'000ULL;
  bool trace = false, literal_eq5 = false;
  ModelFlags model_flags;
  solve->add_option("--pool", pool_path, "pool CSV (id,accuracy[,cost])")->required();
  solve->add_option("--budget", budget_value, "total cost budget")->required();
  solve->add_option("--strategy", strategy,
                    "greedy-forward|greedy-backward|monte-carlo|sa|sherlock");
  solve->add_option("--key", key, "greedy key: accuracy|usefulness");
  solve->add_option("--seed", seed, "master seed")->envname("ENSK_SEED");
  solve->add_option("--model", model_flags.model, "plain|constrained");
  solve->add_option("--weights", model_flags.weights_path, "CSV of decision weights p_{l,k}");
  solve->add_option("--ell-estimator", estimator, "auto|beta|mean-cost|poisson-quantile");
  solve->add_option("--maxstep-cap", maxstep_cap, "upper bound on the escape step count");
  solve->add_flag("--trace", trace, "record best-so-far trace");
  solve->add_flag("--literal-eq5", literal_eq5,
                  "use the degenerate full-binomial efficiency (uniform sampling)");
  solve->add_option("--out", out_path, "write the result document here instead of stdout");

  // stats
  auto* stats = app.add_subcommand("stats", "stopping-rule diagnostics, no search");
  std::string stats_pool, stats_out;
  double stats_budget = -1.0;
  std::uint64_t stats_cap = 1'000'000'000ULL;
  ModelFlags stats_model;
  stats->add_option("--pool", stats_pool, "pool CSV")->required();
  stats->add_option("--budget", stats_budget, "total cost budget (omit for the full-pool path)");
  stats->add_option("--model", stats_model.model, "plain|constrained");
  stats->add_option("--weights", stats_model.weights_path, "CSV of decision weights");
  stats->add_option("--maxstep-cap", stats_cap, "upper bound on the escape step count");
  stats->add_option("--out", stats_out, "output path");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum (n <= 22)");
  std::string oracle_pool, oracle_out;
  double oracle_budget = 0.0;
  ModelFlags oracle_model;
  oracle->add_option("--pool", oracle_pool, "pool CSV")->required();
  oracle->add_option("--budget", oracle_budget, "total cost budget")->required();
  oracle->add_option("--model", oracle_model.model, "plain|constrained");
  oracle->add_option("--weights", oracle_model.weights_path, "CSV of decision weights");
  oracle->add_option("--out", oracle_out, "output path");

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "scripted experiments");
  std::string experiment, out_dir;
  std::size_t replicates = 100;
  std::uint64_t repro_seed = 0;
  reproduce->add_option("--experiment", experiment, "table2-n30|table2-n100|mc-vs-sa|od")
      ->required();
  reproduce->add_option("--replicates", replicates, "replicate count");
  reproduce->add_option("--seed", repro_seed, "master seed")->envname("ENSK_SEED");
  reproduce->add_option("--out-dir", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (solve->parsed()) {
      return cmd_solve(pool_path, budget_value, strategy, key, seed, model_flags, estimator,
                       maxstep_cap, trace, literal_eq5, out_path);
    }
    if (stats->parsed()) {
      std::optional<double> b;
      if (stats->count("--budget") > 0) b = stats_budget;
      return cmd_stats(stats_pool, b, stats_model, stats_cap, stats_out);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_pool, oracle_budget, oracle_model, oracle_out);
    }
    if (reproduce->parsed()) {
      return cmd_reproduce(experiment, replicates, repro_seed, out_dir);
    }
  } catch (const ensk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
