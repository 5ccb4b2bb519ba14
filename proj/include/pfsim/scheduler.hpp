// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfsim/metrics.hpp"
#include "pfsim/types.hpp"

namespace pfsim {

/// Scheduler knobs shared by the heuristic and the exhaustive optimum.
struct SchedulerConfig {
  int window = 2;        // PF averaging window T
  int max_passes = 1;    // outer allocate/adjust sweeps M
  double tier_rate_budget_cue_bps = std::numeric_limits<double>::infinity();
  double tier_rate_budget_d2d_bps = std::numeric_limits<double>::infinity();
  bool instrument = true;
  double enumeration_limit = 1e7;  // optimal scheduler pattern-count refusal
};

/// Instrumented operation counts for one schedule call.
struct OpCounter {
  struct PerPass {
    long cue_wf_calls = 0;  // adjacent water-fill calls in the CUE allocation phase
    long d2d_wf_calls = 0;  // same for the D2D allocation phase
  };
  std::vector<PerPass> passes;
  long patterns_enumerated = 0;  // optimal scheduler only

  long total_wf_calls() const {
    long total = 0;
    for (const auto& p : passes) total += p.cue_wf_calls + p.d2d_wf_calls;
    return total;
  }
};

struct ScheduleOutcome {
  Allocation allocation;
  RateVector cue_rates;
  RateVector d2d_rates;
  double utility = 0.0;
  int iterations_used = 0;
  std::optional<OpCounter> ops;
};

struct EnumerationLimitExceeded : std::runtime_error {
  explicit EnumerationLimitExceeded(double count)
      : std::runtime_error("optimal scheduler refused: " + std::to_string(count) +
                           " joint block patterns exceed the configured limit"),
        pattern_count(count) {}
  double pattern_count;
};

/// Heuristic proportional-fair scheduler: greedy adjacency-constrained
/// water-filling subchannel allocation followed by a capped geometric
/// water-filling rate adjustment, run per tier and swept up to max_passes
/// times so each tier sees the other's latest transmit powers.
ScheduleOutcome heuristic_pf_schedule(const NetworkState& state, const SchedulerConfig& config);

/// Exhaustive proportional-fair optimum over all joint assignments of
/// contiguous per-tier-exclusive blocks. Power within each block comes from
/// the same water-filling kernel; cross-tier interference is resolved with
/// one sweep (CUE powers first, then D2D pairs against them).
ScheduleOutcome optimal_pf_schedule(const NetworkState& state, const SchedulerConfig& config);

enum class SchedulerKind { kHeuristic, kOptimal };

/// Closed-form operation-count model for each scheduler.
double complexity_estimate(SchedulerKind kind, int num_cues, int num_d2d, int num_subchannels,
                           int passes);

/// Number of joint contiguous-block patterns the optimal scheduler would
/// enumerate (both tiers combined).
double count_joint_patterns(int num_cues, int num_d2d, int num_subchannels);
/// Patterns for a single tier of `num_users` users over `num_subchannels`.
double count_tier_patterns(int num_users, int num_subchannels);

/// Per-pass water-fill call counts; refuses outcomes produced without
/// instrumentation.
std::vector<OpCounter::PerPass> count_wf_calls(const ScheduleOutcome& outcome);

}  // namespace pfsim
