// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pfsim/metrics.hpp"
#include "pfsim/rng.hpp"

using namespace pfsim;

namespace {

/// Two CUEs, one D2D pair, five subchannels; gains irrelevant for
/// validation tests.
NetworkState small_state() {
  NetworkState state;
  state.cues = {{0, Vec2(0, 0), 1.0, 100.0}, {1, Vec2(10, 0), 1.0, 100.0}};
  state.d2d = {{0, Vec2(5, 5), Vec2(5, 15), 1.0, 100.0}};
  state.gains = GainTensor(state.num_endpoints(), 5, 1e-20, 180e3);
  return state;
}

Allocation empty_alloc(const NetworkState& state) {
  return Allocation::zero(state.num_cues(), state.num_d2d(), state.num_subchannels());
}

Eigen::ArrayXd vec(std::initializer_list<double> values) {
  Eigen::ArrayXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("contiguous disjoint blocks validate cleanly") {
  const NetworkState state = small_state();
  Allocation alloc = empty_alloc(state);
  for (int k = 1; k <= 3; ++k) alloc.cue_assign(0, k) = 1;  // CUE 0: {1,2,3}
  alloc.cue_assign(1, 4) = 1;                               // CUE 1: {4}
  alloc.cue_power(0, 1) = alloc.cue_power(0, 2) = alloc.cue_power(0, 3) = 0.3;
  alloc.cue_power(1, 4) = 1.0;
  CHECK(validate_allocation(alloc, state).empty());
}

TEST_CASE("a gap in the assigned set is an adjacency violation") {
  const NetworkState state = small_state();
  Allocation alloc = empty_alloc(state);
  alloc.cue_assign(0, 0) = 1;
  alloc.cue_assign(0, 2) = 1;  // gap at 1
  const auto violations = validate_allocation(alloc, state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == Violation::Kind::kAdjacency);
  CHECK(violations[0].user == 0);
}

TEST_CASE("two users on one subchannel is an exclusivity violation") {
  const NetworkState state = small_state();
  Allocation alloc = empty_alloc(state);
  alloc.cue_assign(0, 2) = 1;
  alloc.cue_assign(1, 2) = 1;
  const auto violations = validate_allocation(alloc, state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == Violation::Kind::kExclusivity);
  CHECK(violations[0].subchannel == 2);
}

TEST_CASE("power violations are reported") {
  const NetworkState state = small_state();
  Allocation alloc = empty_alloc(state);
  alloc.cue_assign(0, 0) = 1;
  alloc.cue_power(0, 0) = 2.0;  // budget is 1 W
  auto violations = validate_allocation(alloc, state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == Violation::Kind::kPowerBudget);

  alloc.cue_power(0, 0) = 0.5;
  alloc.cue_power(0, 1) = 0.1;  // unassigned subchannel
  violations = validate_allocation(alloc, state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == Violation::Kind::kPowerOutsideAssign);
}

TEST_CASE("dimension mismatch is a structural error") {
  const NetworkState state = small_state();
  Allocation alloc = Allocation::zero(1, 1, 5);
  CHECK_THROWS_AS(validate_allocation(alloc, state), std::invalid_argument);
}

TEST_CASE("validator agrees with the brute-force check on random allocations") {
  const NetworkState state = small_state();
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    Allocation alloc = empty_alloc(state);
    // random per-user blocks, sometimes overlapping/gapped on purpose
    for (int i = 0; i < state.num_cues(); ++i) {
      for (int k = 0; k < 5; ++k) {
        if (rng.uniform() < 0.3) {
          alloc.cue_assign(i, k) = 1;
          alloc.cue_power(i, k) = rng.uniform(0.0, 0.6);
        }
      }
    }
    for (int k = 0; k < 5; ++k) {
      if (rng.uniform() < 0.3) {
        alloc.d2d_assign(0, k) = 1;
        alloc.d2d_power(0, k) = rng.uniform(0.0, 0.6);
      }
    }
    const bool library_clean = validate_allocation(alloc, state).empty();
    const bool naive_clean = pfsim::testing::naive_violation_count(alloc, state) == 0;
    CHECK(library_clean == naive_clean);
  }
}

TEST_CASE("pf utility at window 1 is the log-rate sum") {
  const double e = std::exp(1.0);
  CHECK(pf_utility(vec({e, e}), Eigen::ArrayXd(), vec({1.0, 1.0}), Eigen::ArrayXd(), 1) ==
        doctest::Approx(2.0));
}

TEST_CASE("pf utility at window 2 with rates equal to averages") {
  CHECK(pf_utility(vec({5.0, 7.0}), Eigen::ArrayXd(), vec({5.0, 7.0}), Eigen::ArrayXd(), 2) ==
        doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("pf utility of all-zero rates is zero for window >= 2") {
  CHECK(pf_utility(vec({0.0, 0.0}), vec({0.0}), vec({1.0, 1.0}), vec({1.0}), 2) == 0.0);
}

TEST_CASE("pf utility sentinel and errors") {
  CHECK(std::isinf(pf_utility(vec({1.0, 0.0}), Eigen::ArrayXd(), vec({1.0, 1.0}),
                              Eigen::ArrayXd(), 1)));
  CHECK(pf_utility(vec({1.0, 0.0}), Eigen::ArrayXd(), vec({1.0, 1.0}), Eigen::ArrayXd(), 1) < 0);
  CHECK_THROWS_AS(pf_utility(vec({-1.0}), Eigen::ArrayXd(), vec({1.0}), Eigen::ArrayXd(), 2),
                  std::domain_error);
  CHECK_THROWS_AS(pf_utility(vec({1.0}), Eigen::ArrayXd(), vec({1.0}), Eigen::ArrayXd(), 0),
                  std::domain_error);
}

TEST_CASE("pf utility strictly increases in each positive rate") {
  const Eigen::ArrayXd avg = vec({2.0, 3.0, 4.0});
  Eigen::ArrayXd rates = vec({1.0, 2.0, 3.0});
  for (int window : {1, 2, 10}) {
    const double base = pf_utility(rates, Eigen::ArrayXd(), avg, Eigen::ArrayXd(), window);
    for (int i = 0; i < 3; ++i) {
      Eigen::ArrayXd bumped = rates;
      bumped(i) += 1e-3;
      CHECK(pf_utility(bumped, Eigen::ArrayXd(), avg, Eigen::ArrayXd(), window) > base);
    }
  }
}

TEST_CASE("average update: direct substitution, fixed point, worked case") {
  CHECK(update_avg_rates(vec({0.0}), vec({10.0}), 10)(0) == doctest::Approx(1.0));
  CHECK(update_avg_rates(vec({5.0}), vec({5.0}), 7)(0) == doctest::Approx(5.0));
  CHECK(update_avg_rates(vec({4.0}), vec({8.0}), 2)(0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(update_avg_rates(vec({1.0}), vec({1.0}), 0), std::domain_error);
}

TEST_CASE("average update stays inside the input range") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double avg = rng.uniform(0.0, 100.0);
    const double achieved = rng.uniform(0.0, 100.0);
    const int window = 1 + static_cast<int>(rng.uniform_index(50));
    const double next = update_avg_rates(vec({avg}), vec({achieved}), window)(0);
    CHECK(next >= std::min(avg, achieved) - 1e-12);
    CHECK(next <= std::max(avg, achieved) + 1e-12);
  }
}
