#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensk/rng.hpp"
#include "ensk/voting_energy.hpp"
#include "oracles.hpp"

using namespace ensk;

namespace {

Pool make_pool(const std::vector<double>& accs, const std::vector<double>& costs) {
  std::vector<Member> members;
  for (std::size_t i = 0; i < accs.size(); ++i) {
    members.push_back({"m" + std::to_string(i), accs[i], costs[i]});
  }
  return validate_pool(members);
}

Pool uniform_random_pool(Rng& rng, std::size_t n) {
  std::vector<Member> members;
  for (std::size_t i = 0; i < n; ++i) {
    members.push_back({"m" + std::to_string(i), rng.uniform(), 0.5 + rng.uniform()});
  }
  return validate_pool(members);
}

}  // namespace

TEST_CASE("success_count_pmf small cases") {
  const auto one = success_count_pmf(std::vector<double>{0.7});
  CHECK(one[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(one[1] == doctest::Approx(0.7).epsilon(1e-15));

  const auto pair = success_count_pmf(std::vector<double>{0.5, 0.5});
  CHECK(pair[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pair[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair[2] == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS(success_count_pmf({}), Error);
}

TEST_CASE("pmf tail of the stalled-forward fixture") {
  const auto pmf = success_count_pmf(std::vector<double>{0.510, 0.505, 0.505});
  CHECK(pmf[2] + pmf[3] == doctest::Approx(0.5099995).epsilon(1e-9));
}

TEST_CASE("pmf sums to one and is permutation invariant") {
  Rng rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> accs(1 + rng.below(10));
    for (auto& a : accs) a = rng.uniform();
    auto pmf = success_count_pmf(accs);
    CHECK(std::abs(std::accumulate(pmf.begin(), pmf.end(), 0.0) - 1.0) < 1e-10);
    auto shuffled = accs;
    rng.shuffle(shuffled);
    auto pmf2 = success_count_pmf(shuffled);
    for (std::size_t k = 0; k < pmf.size(); ++k) CHECK(std::abs(pmf[k] - pmf2[k]) < 1e-13);
  }
}

TEST_CASE("majority accuracy on the reference fixtures") {
  CHECK(majority_accuracy(std::vector<double>{0.7}) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(majority_accuracy(std::vector<double>{0.510, 0.505, 0.505}) ==
        doctest::Approx(0.5100).epsilon(1e-4));
  CHECK(majority_accuracy(std::vector<double>{0.510, 0.505, 0.505, 0.505, 0.505}) ==
        doctest::Approx(0.5112).epsilon(1e-4));
  CHECK(majority_accuracy(std::vector<double>{0.6, 0.6, 0.6}) ==
        doctest::Approx(0.648).epsilon(1e-13));
}

TEST_CASE("constrained accuracy reductions") {
  const std::vector<double> accs{0.35, 0.58, 0.7, 0.85};
  const std::vector<double> all_one(accs.size() + 1, 1.0);
  CHECK(constrained_accuracy(accs, all_one) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> step(accs.size() + 1, 0.0);
  for (std::size_t k = accs.size() / 2 + 1; k <= accs.size(); ++k) step[k] = 1.0;
  CHECK(constrained_accuracy(accs, step) ==
        doctest::Approx(majority_accuracy(accs)).epsilon(1e-14));

  CHECK_THROWS_AS(constrained_accuracy(accs, std::vector<double>{0.0, 1.0}), Error);
  CHECK_THROWS_AS(constrained_accuracy(accs, std::vector<double>{0.0, 0.9, 0.5, 1.0, 1.0}), Error);
}

TEST_CASE("detector weights match outcome enumeration") {
  const std::vector<double> accs{0.220, 0.304, 0.319, 0.643, 0.754, 0.765, 0.958, 0.976};
  const std::vector<double> weights{0.0, 0.11, 0.70, 0.93, 0.99, 1.0, 1.0, 1.0, 1.0};
  const auto model = EnergyModel::constrained(weights);
  CHECK(std::abs(constrained_accuracy(accs, weights) - brute_force_accuracy(accs, model)) < 1e-12);
}

TEST_CASE("brute force fixtures and guard") {
  const auto plain = EnergyModel::plain_majority();
  CHECK(brute_force_accuracy(std::vector<double>{0.6, 0.6, 0.6}, plain) ==
        doctest::Approx(0.648).epsilon(1e-13));
  CHECK(brute_force_accuracy(std::vector<double>{0.42}, plain) ==
        doctest::Approx(0.42).epsilon(1e-15));
  CHECK(brute_force_accuracy(std::vector<double>(5, 0.5), plain) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(brute_force_accuracy(std::vector<double>(26, 0.5), plain), Error);
}

TEST_CASE("convolution agrees with brute force on random pools") {
  Rng rng(82);
  const auto plain = EnergyModel::plain_majority();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> accs(1 + rng.below(12));
    for (auto& a : accs) a = rng.uniform();
    CHECK(std::abs(majority_accuracy(accs) - brute_force_accuracy(accs, plain)) < 1e-12);
  }
}

TEST_CASE("constrained convolution agrees with brute force under random weights") {
  Rng rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ell = 1 + rng.below(10);
    std::vector<double> accs(ell);
    for (auto& a : accs) a = rng.uniform();
    std::vector<double> weights(ell + 1);
    double acc = 0.0;
    for (auto& w : weights) {
      acc += rng.uniform();
      w = acc;
    }
    for (auto& w : weights) w /= acc;  // sorted ascending into [0,1]
    const auto model = EnergyModel::constrained(weights);
    CHECK(std::abs(constrained_accuracy(accs, weights) - brute_force_accuracy(accs, model)) <
          1e-12);
  }
}

TEST_CASE("appending to an even ensemble never hurts") {
  Rng rng(84);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> accs(2 * (1 + rng.below(5)));
    for (auto& a : accs) a = rng.uniform();
    const double before = majority_accuracy(accs);
    double extra = rng.uniform();
    while (extra <= 0.0) extra = rng.uniform();
    accs.push_back(extra);
    CHECK(majority_accuracy(accs) >= before - 1e-12);
  }
}

TEST_CASE("energies stay within [0,1] and dominate the weakest member") {
  Rng rng(85);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ell = 1 + 2 * rng.below(5);  // odd
    std::vector<double> accs(ell);
    double weakest = 1.0;
    for (auto& a : accs) {
      a = 0.5 + 0.5 * rng.uniform_open();
      weakest = std::min(weakest, a);
    }
    const double q = majority_accuracy(accs);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(q >= weakest - 1e-12);
  }
}

TEST_CASE("exhaustive search finds the five-member optimum the forward pass misses") {
  const Pool pool = make_pool({0.510, 0.505, 0.505, 0.505, 0.505}, {1, 1, 1, 1, 1});
  const auto best = best_subset_exhaustive(pool, Budget(5.0), EnergyModel::plain_majority());
  CHECK(best.size() == 5);
  CHECK(best.energy() == doctest::Approx(0.5112).epsilon(1e-4));
}

TEST_CASE("exhaustive search on trivial pools") {
  const Pool pool = make_pool({1.0}, {3.0});
  const auto best = best_subset_exhaustive(pool, Budget(3.0), EnergyModel::plain_majority());
  CHECK(best.size() == 1);
  CHECK(best.energy() == 1.0);
}

TEST_CASE("exhaustive search errors") {
  const Pool pool = make_pool({0.9, 0.8}, {10.0, 12.0});
  CHECK_THROWS_AS(best_subset_exhaustive(pool, Budget(5.0), EnergyModel::plain_majority()), Error);
  Rng rng(86);
  const Pool big = uniform_random_pool(rng, 23);
  CHECK_THROWS_AS(best_subset_exhaustive(big, Budget(1e9), EnergyModel::plain_majority()), Error);
}

TEST_CASE("exhaustive tie-break prefers fewer members then lowest indices") {
  // Two perfect members: every superset containing either ties at energy 1.
  const Pool pool = make_pool({1.0, 1.0, 0.6}, {1.0, 1.0, 1.0});
  const auto best = best_subset_exhaustive(pool, Budget(3.0), EnergyModel::plain_majority());
  CHECK(best.indices() == std::vector<std::size_t>{0});
}

TEST_CASE("unconstrained optima have odd cardinality") {
  Rng rng(87);
  for (int trial = 0; trial < 50; ++trial) {
    const Pool pool = uniform_random_pool(rng, 4 + rng.below(7));
    const auto best =
        best_subset_exhaustive(pool, Budget(pool.total_cost()), EnergyModel::plain_majority());
    CHECK(best.size() % 2 == 1);
  }
}

TEST_CASE("library majority matches the independent enumeration oracle") {
  Rng rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> accs(1 + rng.below(10));
    for (auto& a : accs) a = rng.uniform();
    CHECK(std::abs(majority_accuracy(accs) - testing::enumerate_majority(accs)) < 1e-12);
  }
}
