// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pfsim/metrics.hpp"
#include "pfsim/scenario.hpp"
#include "pfsim/scheduler.hpp"

using namespace pfsim;

namespace {

/// Hand-built state with unit noise power (bandwidth 1 Hz, N0 = 1 W/Hz) so
/// a flat link gain g gives stair depth (1 + I) / g.
struct StateBuilder {
  int num_subchannels = 4;
  std::vector<double> cue_gains;      // flat per CUE
  std::vector<double> cue_avg;
  std::vector<double> d2d_gains;      // flat per pair
  std::vector<double> d2d_avg;
  double d2d_to_enb_gain = 0.0;       // cross-tier interference gains
  double cue_to_d2drx_gain = 0.0;
  double max_power_w = 4.0;

  NetworkState build() const {
    NetworkState state;
    for (std::size_t i = 0; i < cue_gains.size(); ++i) {
      state.cues.push_back({static_cast<int>(i), Vec2(0, 0), max_power_w, cue_avg[i]});
    }
    for (std::size_t j = 0; j < d2d_gains.size(); ++j) {
      state.d2d.push_back({static_cast<int>(j), Vec2(1, 0), Vec2(1, 1), max_power_w, d2d_avg[j]});
    }
    state.gains = GainTensor(state.num_endpoints(), num_subchannels, 1.0, 1.0);
    for (int k = 0; k < num_subchannels; ++k) {
      for (std::size_t i = 0; i < cue_gains.size(); ++i) {
        const int cue = state.cue_endpoint(static_cast<int>(i));
        state.gains.set(cue, NetworkState::kEnbEndpoint, k, cue_gains[i]);
        for (std::size_t j = 0; j < d2d_gains.size(); ++j) {
          state.gains.set(cue, state.d2d_rx_endpoint(static_cast<int>(j)), k, cue_to_d2drx_gain);
        }
      }
      for (std::size_t j = 0; j < d2d_gains.size(); ++j) {
        const int tx = state.d2d_tx_endpoint(static_cast<int>(j));
        state.gains.set(tx, state.d2d_rx_endpoint(static_cast<int>(j)), k, d2d_gains[j]);
        state.gains.set(tx, NetworkState::kEnbEndpoint, k, d2d_to_enb_gain);
      }
    }
    return state;
  }
};

ScenarioConfig compare_config(int subchannels, int cues, int d2d) {
  ScenarioConfig config;
  config.num_subchannels = subchannels;
  config.num_cues = cues;
  config.num_d2d = d2d;
  config.window = 2;
  config.max_passes = 1;
  config.fading = "flat";
  config.ttis = 1;
  return config;
}

}  // namespace

TEST_CASE("without D2D pairs the outcome is the CUE phases alone") {
  StateBuilder builder;
  builder.cue_gains = {2.0, 1.0};
  builder.cue_avg = {100.0, 50.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.max_passes = 3;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);

  CHECK(outcome.allocation.d2d_assign.rows() == 0);
  CHECK(outcome.d2d_rates.rates_bps.size() == 0);
  CHECK(validate_allocation(outcome.allocation, state).empty());
  // lowest (T-1)*avg picks first and, on a flat channel, takes the full band
  CHECK(outcome.allocation.cue_assign.row(1).sum() == 4);
  const Eigen::ArrayXd avg = Eigen::ArrayXd::Map(builder.cue_avg.data(), 2);
  CHECK(outcome.utility == doctest::Approx(pf_tier_utility(outcome.cue_rates.rates_bps, avg, 2)));
}

TEST_CASE("decoupled tiers each water-fill their own full band") {
  StateBuilder builder;
  builder.num_subchannels = 4;
  builder.cue_gains = {1.0};
  builder.cue_avg = {10.0};
  builder.d2d_gains = {1.0};
  builder.d2d_avg = {10.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.max_passes = 1;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);

  // flat channel, no interference: equal split of the 4 W budget over 4 stairs
  for (int k = 0; k < 4; ++k) {
    CHECK(outcome.allocation.cue_assign(0, k) == 1);
    CHECK(outcome.allocation.cue_power(0, k) == doctest::Approx(1.0));
    CHECK(outcome.allocation.d2d_assign(0, k) == 1);
    CHECK(outcome.allocation.d2d_power(0, k) == doctest::Approx(1.0));
  }
  // rate = K * log2(1 + p*g/noise) = 4 * log2(2)
  CHECK(outcome.cue_rates.rates_bps(0) == doctest::Approx(4.0));
  CHECK(outcome.d2d_rates.rates_bps(0) == doctest::Approx(4.0));
}

TEST_CASE("users keep their water-filled rate when tier budgets are infinite") {
  StateBuilder builder;
  builder.cue_gains = {1.0, 4.0};
  builder.cue_avg = {10.0, 20.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  for (int i = 0; i < 2; ++i) {
    CHECK(outcome.cue_rates.rates_bps(i) == doctest::Approx(outcome.cue_rates.caps_bps(i)));
  }
}

TEST_CASE("a finite tier budget redistributes toward low-average users") {
  StateBuilder builder;
  builder.num_subchannels = 2;
  builder.cue_gains = {1.0, 1.0};
  builder.cue_avg = {1.0, 3.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.tier_rate_budget_cue_bps = 1.5;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  CHECK(outcome.cue_rates.rates_bps.sum() <= 1.5 + 1e-9);
  CHECK(outcome.cue_rates.rates_bps(0) >= outcome.cue_rates.rates_bps(1));
}

TEST_CASE("lowest weighted average picks first and takes the best stairs") {
  StateBuilder builder;
  builder.num_subchannels = 2;
  builder.cue_gains = {1.0, 1.0};
  builder.cue_avg = {50.0, 10.0};  // CUE 1 goes first
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  // first pick grabs both stairs (wider block always wins on flat channels),
  // leaving CUE 0 with nothing
  CHECK(outcome.allocation.cue_assign.row(1).sum() == 2);
  CHECK(outcome.allocation.cue_assign.row(0).sum() == 0);
  CHECK(outcome.cue_rates.rates_bps(0) == 0.0);
}

TEST_CASE("second pass sees the other tier's interference and may converge early") {
  StateBuilder builder;
  builder.cue_gains = {1.0};
  builder.cue_avg = {10.0};
  builder.d2d_gains = {1.0};
  builder.d2d_avg = {10.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.max_passes = 5;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  // no cross gains: pass 2 reproduces pass 1, loop exits
  CHECK(outcome.iterations_used == 2);
  REQUIRE(outcome.ops.has_value());
  CHECK(outcome.ops->passes.size() == 2);
}

TEST_CASE("water-fill call counts are exactly users times subchannels per pass") {
  StateBuilder builder;
  builder.num_subchannels = 5;
  builder.cue_gains = {1.0, 2.0, 0.5};
  builder.cue_avg = {1.0, 2.0, 3.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.max_passes = 1;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  const auto counts = count_wf_calls(outcome);
  REQUIRE(counts.size() == 1);
  CHECK(counts[0].cue_wf_calls == 15);  // 3 users x 5 starts
  CHECK(counts[0].d2d_wf_calls == 0);
}

TEST_CASE("two passes double the call counts") {
  StateBuilder builder;
  builder.num_subchannels = 3;
  builder.cue_gains = {1.0, 2.0};
  builder.cue_avg = {1.0, 2.0};
  builder.d2d_gains = {1.5};
  builder.d2d_avg = {1.0};
  builder.d2d_to_enb_gain = 0.2;
  builder.cue_to_d2drx_gain = 0.2;
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  config.max_passes = 2;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  const auto counts = count_wf_calls(outcome);
  REQUIRE(counts.size() == 2);
  for (const auto& pass : counts) {
    CHECK(pass.cue_wf_calls == 6);
    CHECK(pass.d2d_wf_calls == 3);
  }
}

TEST_CASE("instrumentation can be disabled") {
  StateBuilder builder;
  builder.cue_gains = {1.0};
  builder.cue_avg = {1.0};
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  config.instrument = false;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  CHECK_THROWS_AS(count_wf_calls(outcome), std::logic_error);
}

TEST_CASE("window 1 selects by plain average and uses the log-rate objective") {
  StateBuilder builder;
  builder.num_subchannels = 2;
  builder.cue_gains = {1.0, 1.0};
  builder.cue_avg = {5.0, 0.0};  // zero average allowed at window 1
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 1;
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config);
  // CUE 1 (lowest average) picks first and takes everything on a flat channel
  CHECK(outcome.allocation.cue_assign.row(1).sum() == 2);
  CHECK(std::isinf(outcome.utility));  // CUE 0 starves -> -inf sentinel
  CHECK(outcome.utility < 0.0);
}

TEST_CASE("optimal scheduler on one subchannel gives it to the single user at full power") {
  StateBuilder builder;
  builder.num_subchannels = 1;
  builder.cue_gains = {1.0};
  builder.cue_avg = {10.0};
  const NetworkState state = builder.build();

  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = optimal_pf_schedule(state, config);
  CHECK(outcome.allocation.cue_assign(0, 0) == 1);
  CHECK(outcome.allocation.cue_power(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("pattern counting: 7 cases for one user on three subchannels") {
  CHECK(count_tier_patterns(1, 3) == doctest::Approx(7.0));  // 6 blocks + empty
  CHECK(count_tier_patterns(0, 3) == doctest::Approx(1.0));
  CHECK(count_joint_patterns(1, 0, 3) == doctest::Approx(7.0));

  // the enumeration itself visits exactly that many patterns
  StateBuilder builder;
  builder.num_subchannels = 3;
  builder.cue_gains = {1.0};
  builder.cue_avg = {10.0};
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = optimal_pf_schedule(state, config);
  REQUIRE(outcome.ops.has_value());
  CHECK(outcome.ops->patterns_enumerated == 7);
}

TEST_CASE("pattern counting matches hand enumeration on two users, two subchannels") {
  // pairs of disjoint blocks over {0,1}: both empty (1), one non-empty block
  // for either user (2 users x 3 blocks), and the two singleton splits
  CHECK(count_tier_patterns(2, 2) == doctest::Approx(9.0));
}

TEST_CASE("pattern counting matches the enumeration for three users") {
  StateBuilder builder;
  builder.num_subchannels = 4;
  builder.cue_gains = {1.0, 2.0, 0.5};
  builder.cue_avg = {10.0, 20.0, 30.0};
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = optimal_pf_schedule(state, config);
  REQUIRE(outcome.ops.has_value());
  CHECK(static_cast<double>(outcome.ops->patterns_enumerated) ==
        doctest::Approx(count_tier_patterns(3, 4)));
}

TEST_CASE("pattern counting matches the enumeration for two users") {
  StateBuilder builder;
  builder.num_subchannels = 3;
  builder.cue_gains = {1.0, 2.0};
  builder.cue_avg = {10.0, 20.0};
  builder.d2d_gains = {1.0};
  builder.d2d_avg = {10.0};
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = optimal_pf_schedule(state, config);
  REQUIRE(outcome.ops.has_value());
  CHECK(static_cast<double>(outcome.ops->patterns_enumerated) ==
        doctest::Approx(count_joint_patterns(2, 1, 3)));
}

TEST_CASE("oversized instances are refused with a pattern count") {
  StateBuilder builder;
  builder.num_subchannels = 12;
  builder.cue_gains = std::vector<double>(6, 1.0);
  builder.cue_avg = std::vector<double>(6, 1.0);
  builder.d2d_gains = std::vector<double>(6, 1.0);
  builder.d2d_avg = std::vector<double>(6, 1.0);
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  CHECK_THROWS_AS(optimal_pf_schedule(state, config), EnumerationLimitExceeded);
}

TEST_CASE("exhaustive optimum dominates the heuristic on seeded instances") {
  int instance = 0;
  for (int subchannels : {2, 3}) {
    for (int cues : {1, 2}) {
      for (int d2d : {1, 2}) {
        const ScenarioConfig config = compare_config(subchannels, cues, d2d);
        const NetworkState state = random_instant_state(config, 1000 + instance++);
        const SchedulerConfig sched = config.scheduler_config();
        const ScheduleOutcome heuristic = heuristic_pf_schedule(state, sched);
        const ScheduleOutcome optimal = optimal_pf_schedule(state, sched);
        CHECK(heuristic.utility <= optimal.utility + 1e-9);
        CHECK(validate_allocation(heuristic.allocation, state).empty());
        CHECK(validate_allocation(optimal.allocation, state).empty());
      }
    }
  }
}

TEST_CASE("with one user per tier and no cross gains both schedulers agree exactly") {
  StateBuilder builder;
  builder.num_subchannels = 3;
  builder.cue_gains = {1.5};
  builder.cue_avg = {10.0};
  builder.d2d_gains = {0.5};
  builder.d2d_avg = {20.0};
  const NetworkState state = builder.build();
  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome heuristic = heuristic_pf_schedule(state, config);
  const ScheduleOutcome optimal = optimal_pf_schedule(state, config);
  CHECK(heuristic.utility == doctest::Approx(optimal.utility).epsilon(1e-12));
}

TEST_CASE("outcome utility is the pf utility of its rates") {
  const ScenarioConfig config = compare_config(3, 2, 2);
  const NetworkState state = random_instant_state(config, 7);
  const ScheduleOutcome outcome = heuristic_pf_schedule(state, config.scheduler_config());
  Eigen::ArrayXd cue_avg(2), d2d_avg(2);
  for (int i = 0; i < 2; ++i) cue_avg(i) = state.cues[static_cast<std::size_t>(i)].avg_rate_bps;
  for (int j = 0; j < 2; ++j) d2d_avg(j) = state.d2d[static_cast<std::size_t>(j)].avg_rate_bps;
  CHECK(outcome.utility == doctest::Approx(pf_utility(outcome.cue_rates.rates_bps,
                                                      outcome.d2d_rates.rates_bps, cue_avg,
                                                      d2d_avg, 2)));
}

TEST_CASE("identical inputs give bit-identical outcomes") {
  const ScenarioConfig config = compare_config(4, 3, 2);
  const NetworkState state = random_instant_state(config, 99);
  const SchedulerConfig sched = config.scheduler_config();
  const ScheduleOutcome a = heuristic_pf_schedule(state, sched);
  const ScheduleOutcome b = heuristic_pf_schedule(state, sched);
  CHECK(a.utility == b.utility);
  CHECK((a.allocation.cue_assign == b.allocation.cue_assign).all());
  CHECK((a.allocation.cue_power == b.allocation.cue_power).all());
  CHECK((a.cue_rates.rates_bps == b.cue_rates.rates_bps).all());
  CHECK((a.d2d_rates.rates_bps == b.d2d_rates.rates_bps).all());
}

TEST_CASE("relabelling users with distinct weights permutes the outcome") {
  StateBuilder forward;
  forward.num_subchannels = 3;
  forward.cue_gains = {1.0, 3.0};
  forward.cue_avg = {5.0, 9.0};
  StateBuilder reversed = forward;
  std::reverse(reversed.cue_gains.begin(), reversed.cue_gains.end());
  std::reverse(reversed.cue_avg.begin(), reversed.cue_avg.end());

  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome a = heuristic_pf_schedule(forward.build(), config);
  const ScheduleOutcome b = heuristic_pf_schedule(reversed.build(), config);
  CHECK(a.cue_rates.rates_bps(0) == doctest::Approx(b.cue_rates.rates_bps(1)));
  CHECK(a.cue_rates.rates_bps(1) == doctest::Approx(b.cue_rates.rates_bps(0)));
  CHECK(a.utility == doctest::Approx(b.utility));
}

TEST_CASE("swapping indistinguishable users leaves the rate multiset unchanged") {
  StateBuilder builder;
  builder.num_subchannels = 3;
  builder.cue_gains = {2.0, 2.0};
  builder.cue_avg = {5.0, 5.0};
  SchedulerConfig config;
  config.window = 2;
  const ScheduleOutcome outcome = heuristic_pf_schedule(builder.build(), config);
  // deterministic tie-break: user 0 picks first; the pair of rates is what
  // any relabelling must reproduce
  Eigen::ArrayXd sorted = outcome.cue_rates.rates_bps;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted(1) >= sorted(0));
  CHECK(outcome.cue_rates.rates_bps(0) == doctest::Approx(sorted(1)));
}

TEST_CASE("complexity estimates follow the closed forms") {
  CHECK(complexity_estimate(SchedulerKind::kOptimal, 5, 3, 3, 1) == doctest::Approx(512.0));
  // log2(1) = 0 leaves only the 5K term
  CHECK(complexity_estimate(SchedulerKind::kHeuristic, 2, 2, 1, 1) ==
        doctest::Approx(5.0 * 12.0));
  CHECK(complexity_estimate(SchedulerKind::kHeuristic, 2, 2, 5, 1) ==
        doctest::Approx((5.0 * std::log2(5.0) + 25.0) * 12.0));
  CHECK(complexity_estimate(SchedulerKind::kHeuristic, 3, 3, 25, 2) ==
        doctest::Approx(2.0 * complexity_estimate(SchedulerKind::kHeuristic, 3, 3, 25, 1)));
  CHECK_THROWS_AS(complexity_estimate(SchedulerKind::kOptimal, 1, 1, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("the optimal-to-heuristic complexity ratio grows with the subchannel count") {
  double prev = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double ratio = complexity_estimate(SchedulerKind::kOptimal, 5, 5, k, 1) /
                         complexity_estimate(SchedulerKind::kHeuristic, 5, 5, k, 1);
    if (k > 1) CHECK(ratio > prev);
    prev = ratio;
  }
}
