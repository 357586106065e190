#include "ensk/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ensk/energy_stats.hpp"
#include "ensk/voting_energy.hpp"

namespace ensk {

Pool::Pool(std::vector<Member> members) : members_(std::move(members)) {}

std::vector<double> Pool::accuracies() const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.accuracy);
  return out;
}

std::vector<double> Pool::costs() const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.cost);
  return out;
}

double Pool::total_cost() const {
  double sum = 0.0;
  for (const auto& m : members_) sum += m.cost;
  return sum;
}

Pool validate_pool(const std::vector<Member>& raw) {
  std::vector<std::string> issues;
  std::optional<Errc> first;
  auto report = [&](Errc code, std::string msg) {
    if (!first) first = code;
    issues.push_back(std::move(msg));
  };

  if (raw.empty()) report(Errc::EmptyPool, "pool has no members");

  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> reported_dup;
  for (const auto& m : raw) {
    if (!seen.insert(m.id).second && reported_dup.insert(m.id).second) {
      report(Errc::DuplicateId, "duplicate id '" + m.id + "'");
    }
    if (!(m.accuracy >= 0.0 && m.accuracy <= 1.0)) {
      report(Errc::AccuracyOutOfRange, "accuracy of '" + m.id + "' outside [0,1]");
    }
    if (!(m.cost > 0.0) || !std::isfinite(m.cost)) {
      report(Errc::NonPositiveCost, "cost of '" + m.id + "' not a positive real");
    }
  }

  if (first) throw ValidationError(*first, std::move(issues));
  return Pool(raw);
}

void check_weight_table(std::span<const double> weights) {
  if (weights.empty()) throw Error(Errc::EmptyInput, "weight table is empty");
  double prev = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0 && w <= 1.0) || w < prev) {
      throw Error(Errc::WeightsNotMonotone,
                  "weights must satisfy 0 <= w_0 <= ... <= w_ell <= 1 (entry " +
                      std::to_string(k) + ")");
    }
    prev = w;
  }
}

EnergyModel EnergyModel::constrained(std::vector<double> table,
                                     std::optional<ConstraintCurve> curve) {
  check_weight_table(table);
  EnergyModel m;
  m.kind_ = Kind::ConstrainedMajority;
  m.table_ = std::move(table);
  m.curve_ = curve;
  return m;
}

EnergyModel EnergyModel::constrained(const ConstraintCurve& curve) {
  EnergyModel m;
  m.kind_ = Kind::ConstrainedMajority;
  m.curve_ = curve;
  return m;
}

std::vector<double> EnergyModel::weights_for(std::size_t ell) const {
  if (kind_ == Kind::PlainMajority) {
    std::vector<double> w(ell + 1, 0.0);
    for (std::size_t k = ell / 2 + 1; k <= ell; ++k) w[k] = 1.0;
    return w;
  }
  if (table_ && table_->size() == ell + 1) return *table_;
  if (curve_) {
    std::vector<double> w(ell + 1);
    for (std::size_t k = 0; k <= ell; ++k) {
      w[k] = eval_constraint_curve(*curve_, static_cast<double>(k) / static_cast<double>(ell));
    }
    check_weight_table(w);
    return w;
  }
  throw Error(Errc::WeightsLengthMismatch,
              "weight table is for ell=" + std::to_string(table_ ? table_->size() - 1 : 0) +
                  " and no curve is available for ell=" + std::to_string(ell));
}

Selection Selection::make(const Pool& pool, const EnergyModel& model,
                          std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw Error(Errc::InvalidArgument, "selection has duplicate indices");
  }
  if (!indices.empty() && indices.back() >= pool.size()) {
    throw Error(Errc::InvalidArgument, "selection index out of range");
  }
  Selection sel;
  sel.indices_ = std::move(indices);
  std::vector<double> accs;
  accs.reserve(sel.indices_.size());
  for (std::size_t i : sel.indices_) {
    sel.total_cost_ += pool[i].cost;
    accs.push_back(pool[i].accuracy);
  }
  sel.energy_ = accs.empty() ? 0.0 : ensemble_energy(model, accs);
  return sel;
}

std::vector<std::string> Selection::ids(const Pool& pool) const {
  std::vector<std::string> out;
  out.reserve(indices_.size());
  for (std::size_t i : indices_) out.push_back(pool[i].id);
  return out;
}

bool Selection::verify(const Pool& pool, const EnergyModel& model) const {
  double cost = 0.0;
  std::vector<double> accs;
  accs.reserve(indices_.size());
  for (std::size_t i : indices_) {
    if (i >= pool.size()) return false;
    cost += pool[i].cost;
    accs.push_back(pool[i].accuracy);
  }
  const double energy = accs.empty() ? 0.0 : ensemble_energy(model, accs);
  const double cost_tol = 1e-12 * std::max(1.0, std::abs(cost));
  return std::abs(cost - total_cost_) <= cost_tol && std::abs(energy - energy_) <= 1e-12;
}

}  // namespace ensk
