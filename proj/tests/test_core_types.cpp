#include <doctest.h>

#include "ensk/energy_stats.hpp"
#include "ensk/types.hpp"
#include "ensk/voting_energy.hpp"

using namespace ensk;

TEST_CASE("validate_pool accepts a minimal pool") {
  const Pool pool = validate_pool({{"a", 0.9, 1.0}});
  CHECK(pool.size() == 1);
  CHECK(pool[0].accuracy == 0.9);
}

TEST_CASE("validate_pool rejects duplicate ids") {
  CHECK_THROWS_WITH_AS(validate_pool({{"a", 0.9, 1.0}, {"a", 0.8, 2.0}}),
                       doctest::Contains("duplicate id 'a'"), ValidationError);
}

TEST_CASE("validate_pool accepts the eight-detector pool") {
  const Pool pool = validate_pool({{"od1", 0.220, 31},
                                   {"od2", 0.304, 38},
                                   {"od3", 0.319, 34},
                                   {"od4", 0.643, 69},
                                   {"od5", 0.754, 11},
                                   {"od6", 0.765, 7},
                                   {"od7", 0.958, 21},
                                   {"od8", 0.976, 90}});
  CHECK(pool.size() == 8);
  CHECK(pool.total_cost() == doctest::Approx(301.0));
}

TEST_CASE("validate_pool lists every violation") {
  try {
    validate_pool({{"x", 1.2, -1.0}, {"x", 0.5, 0.0}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() == 4);  // duplicate, accuracy, two costs
  }
}

TEST_CASE("validate_pool rejects an empty list") {
  CHECK_THROWS_AS(validate_pool({}), ValidationError);
}

TEST_CASE("boundary accuracies 0 and 1 are accepted") {
  const Pool pool = validate_pool({{"zero", 0.0, 1.0}, {"one", 1.0, 1.0}});
  CHECK(pool.size() == 2);
}

TEST_CASE("re-validating an accepted pool never fails") {
  const Pool pool = validate_pool({{"a", 0.9, 1.0}, {"b", 0.5, 2.5}});
  const Pool again = validate_pool(pool.members());
  CHECK(again.size() == pool.size());
}

TEST_CASE("budget must be positive") {
  CHECK_THROWS_AS(Budget(0.0), Error);
  CHECK_THROWS_AS(Budget(-1.0), Error);
}

TEST_CASE("selection caches cost and energy consistently") {
  const Pool pool = validate_pool({{"a", 0.9, 1.0}, {"b", 0.8, 2.0}, {"c", 0.7, 3.0}});
  const auto model = EnergyModel::plain_majority();
  const auto sel = Selection::make(pool, model, {2, 0});
  CHECK(sel.indices() == std::vector<std::size_t>{0, 2});
  CHECK(sel.total_cost() == doctest::Approx(4.0));
  CHECK(sel.verify(pool, model));
  CHECK(sel.ids(pool) == std::vector<std::string>{"a", "c"});
}

TEST_CASE("selection rejects duplicates and bad indices") {
  const Pool pool = validate_pool({{"a", 0.9, 1.0}});
  const auto model = EnergyModel::plain_majority();
  CHECK_THROWS_AS(Selection::make(pool, model, {0, 0}), Error);
  CHECK_THROWS_AS(Selection::make(pool, model, {1}), Error);
}

TEST_CASE("plain model weights are the majority step") {
  const auto w = EnergyModel::plain_majority().weights_for(4);
  CHECK(w == std::vector<double>{0, 0, 0, 1, 1});
}

TEST_CASE("constrained model uses the table at its own size and the curve elsewhere") {
  std::vector<double> table{0.0, 0.2, 0.9, 1.0};
  const auto model = EnergyModel::constrained(table, ConstraintCurve{-2.0, 50.0});
  CHECK(model.weights_for(3) == table);
  const auto w5 = model.weights_for(5);
  CHECK(w5.size() == 6);
  CHECK(w5.front() == 0.0);
  CHECK(w5.back() == 1.0);
  for (std::size_t k = 1; k < w5.size(); ++k) CHECK(w5[k] >= w5[k - 1]);
}

TEST_CASE("constrained model without a curve rejects other sizes") {
  const auto model = EnergyModel::constrained({0.0, 0.5, 1.0});
  CHECK_THROWS_AS(model.weights_for(5), Error);
}

TEST_CASE("non-monotone weight tables are rejected") {
  CHECK_THROWS_AS(EnergyModel::constrained({0.0, 0.9, 0.5}), Error);
  CHECK_THROWS_AS(EnergyModel::constrained({0.0, 0.5, 1.2}), Error);
}
