#include "ensk/document.hpp"

namespace ensk {

Json stop_rule_to_json(const StopRule& rule) {
  const auto& d = rule.derivation;
  Json j;
  j["stop"] = rule.stop;
  j["maxstep"] = rule.maxstep;
  Json der;
  der["branch"] = stop_branch_name(d.branch);
  if (d.branch != StopBranch::Manual) {
    der["ell_estimator"] = size_estimator_name(d.estimator);
    der["ell_hat"] = d.ell_hat;
    der["mu_q"] = d.mu_q;
    der["var_q"] = d.var_q;
    der["constrained_moments"] = d.constrained;
    der["maxstep_stirling"] = d.maxstep_stirling;
    if (d.branch == StopBranch::Beta) {
      der["alpha_q"] = d.alpha_q;
      der["beta_q"] = d.beta_q;
      der["mode"] = d.mode;
      der["skewness"] = d.skewness;
      der["stop_probability"] = d.stop_prob;
    }
  }
  j["derivation"] = der;
  return j;
}

Json selection_to_json(const Pool& pool, const Selection& sel) {
  Json j;
  j["ids"] = sel.ids(pool);
  j["indices"] = sel.indices();
  j["size"] = sel.size();
  j["total_cost"] = sel.total_cost();
  j["energy"] = sel.energy();
  return j;
}

Json search_result_to_json(const Pool& pool, const SearchResult& result) {
  Json j;
  j["selection"] = selection_to_json(pool, result.best);
  j["steps_executed"] = result.steps_executed;
  j["terminated_by"] = termination_name(result.terminated_by);
  j["wall_seconds"] = result.wall_seconds;
  if (!result.trace.empty()) {
    Json trace = Json::array();
    for (const auto& [step, energy] : result.trace) {
      trace.push_back(Json{{"step", step}, {"best_energy", energy}});
    }
    j["trace"] = trace;
  }
  return j;
}

Json make_result_document(const std::map<std::string, Json>& inputs, const Pool& pool,
                          const std::optional<StopRule>& rule, const SearchResult& result) {
  Json doc;
  doc["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
  Json in;
  for (const auto& [key, value] : inputs) in[key] = value;
  doc["inputs"] = in;
  doc["pool"] = Json{{"size", pool.size()}, {"total_cost", pool.total_cost()}};
  if (rule) doc["stop_rule"] = stop_rule_to_json(*rule);
  doc["result"] = search_result_to_json(pool, result);
  return doc;
}

Json experiment_report_to_json(const ExperimentReport& report) {
  Json doc;
  doc["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
  doc["experiment"] = report.name;
  doc["replicates"] = report.replicates;
  doc["master_seed"] = report.master_seed;
  Json config;
  for (const auto& [key, value] : report.config) config[key] = value;
  doc["config"] = config;
  Json cells;
  for (const auto& [name, stats] : report.cells) {
    cells[name] = Json{{"mean_energy", stats.mean_energy},
                       {"std_energy", stats.std_energy},
                       {"mean_steps", stats.mean_steps},
                       {"wall_seconds", stats.mean_wall_seconds},
                       {"terminated_by_stop", stats.stop_count},
                       {"terminated_by_maxstep", stats.maxstep_count},
                       {"terminated_by_exhausted", stats.exhausted_count}};
  }
  doc["cells"] = cells;
  Json extra;
  for (const auto& [key, value] : report.extra) extra[key] = value;
  doc["extra"] = extra;
  return doc;
}

void strip_wall_times(Json& doc) {
  if (doc.is_object()) {
    doc.erase("wall_seconds");
    for (auto& [key, value] : doc.items()) strip_wall_times(value);
  } else if (doc.is_array()) {
    for (auto& value : doc) strip_wall_times(value);
  }
}

}  // namespace ensk
