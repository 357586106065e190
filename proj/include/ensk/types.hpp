#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ensk/errors.hpp"

namespace ensk {

/// One candidate voter: accuracy in [0,1], strictly positive cost.
struct Member {
  std::string id;
  double accuracy = 0.0;
  double cost = 1.0;
};

/// Ordered, non-empty collection of members with distinct ids.
/// Immutable after construction; safe to share across threads.
class Pool {
 public:
  static Pool from_members(std::vector<Member> members) { return Pool(std::move(members)); }

  std::size_t size() const { return members_.size(); }
  const Member& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<Member>& members() const { return members_; }

  std::vector<double> accuracies() const;
  std::vector<double> costs() const;
  double total_cost() const;

 private:
  friend Pool validate_pool(const std::vector<Member>& raw);
  explicit Pool(std::vector<Member> members);

  std::vector<Member> members_;
};

/// Validates the raw member list and builds a Pool. On failure throws a
/// ValidationError listing every violated invariant, not just the first.
Pool validate_pool(const std::vector<Member>& raw);

struct Budget {
  explicit Budget(double t) : total(t) {
    if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "budget must be positive");
  }
  double total;
};

/// Decision curve F(x) = b / (b + (x/(1-x))^a) used to extend an empirical
/// weight table to arbitrary ensemble sizes.
struct ConstraintCurve {
  double a = 0.0;
  double b = 1.0;
};

/// Plain majority voting, or the weighted variant where a decision made with
/// exactly k correct votes out of ell succeeds with probability weights[k].
class EnergyModel {
 public:
  enum class Kind { PlainMajority, ConstrainedMajority };

  static EnergyModel plain_majority() { return EnergyModel(); }
  static EnergyModel constrained(std::vector<double> table,
                                 std::optional<ConstraintCurve> curve = std::nullopt);
  static EnergyModel constrained(const ConstraintCurve& curve);

  Kind kind() const { return kind_; }
  bool is_plain() const { return kind_ == Kind::PlainMajority; }
  const std::optional<std::vector<double>>& table() const { return table_; }
  const std::optional<ConstraintCurve>& curve() const { return curve_; }

  /// Weight vector of length ell+1 for an ensemble of size ell. Uses the
  /// explicit table when its length matches, otherwise evaluates the curve.
  std::vector<double> weights_for(std::size_t ell) const;

 private:
  EnergyModel() = default;
  Kind kind_ = Kind::PlainMajority;
  std::optional<std::vector<double>> table_;
  std::optional<ConstraintCurve> curve_;
};

/// Validates 0 <= w_0 <= ... <= w_ell <= 1; throws WeightsNotMonotone.
void check_weight_table(std::span<const double> weights);

/// Index subset with cached cost and energy. Construction recomputes both
/// from the pool, so a Selection that exists is consistent by construction.
class Selection {
 public:
  Selection() = default;  // empty placeholder; real ones come from make()

  static Selection make(const Pool& pool, const EnergyModel& model,
                        std::vector<std::size_t> indices);

  const std::vector<std::size_t>& indices() const { return indices_; }
  double total_cost() const { return total_cost_; }
  double energy() const { return energy_; }
  std::size_t size() const { return indices_.size(); }

  std::vector<std::string> ids(const Pool& pool) const;

  /// Recomputes cost and energy from the pool and compares against the cached
  /// values (1e-12 relative / absolute).
  bool verify(const Pool& pool, const EnergyModel& model) const;

 private:
  std::vector<std::size_t> indices_;
  double total_cost_ = 0.0;
  double energy_ = 0.0;
};

}  // namespace ensk
