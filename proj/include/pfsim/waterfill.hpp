// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace pfsim {

/// Raised when a user has no subchannel it could pour any power into.
struct NoFeasibleChannel : std::runtime_error {
  NoFeasibleChannel() : std::runtime_error("no feasible subchannel for water-filling") {}
};

/// Stair description for adjacency-constrained water-filling.
///
/// depths(k) is the effective noise-over-gain (N0*B + I_k) / g_k in watts.
/// A blocked subchannel (zeroed gain) is marked with +infinity rather than
/// a huge finite depth.
struct StairProfile {
  Eigen::ArrayXd depths_w;
  double budget_w = 0.0;
  Eigen::Index start = 0;  // first stair water may be poured into (0-based)
  double bandwidth_hz = 1.0;

  Eigen::Index size() const { return depths_w.size(); }
  bool blocked(Eigen::Index k) const { return !std::isfinite(depths_w(k)); }
};

/// Water-filling outcome for one (user, start) case. The block is the
/// contiguous run [block_begin, block_end) of assigned stairs; powers are
/// zero outside it and the first and last stair of a non-empty block always
/// carry positive power.
struct WaterfillResult {
  Eigen::ArrayXd powers_w;
  double water_level_w = 0.0;
  double rate_bps = 0.0;
  Eigen::Index block_begin = 0;
  Eigen::Index block_end = 0;  // one past the last assigned stair

  bool empty() const { return block_begin == block_end; }
  Eigen::Index block_length() const { return block_end - block_begin; }
};

/// Maximises sum_k B log2(1 + p_k / d_k) subject to: nothing before the
/// start stair, heights p_k + d_k non-decreasing over the allocated block,
/// and total power within budget. Blocks are enumerated by their last stair
/// and each one is filled to the exact water level in closed form.
///
/// Throws NoFeasibleChannel when every stair at or after the start is
/// blocked. A blocked start stair with feasible stairs further right yields
/// an empty result (the block may not skip ahead).
WaterfillResult adjacent_waterfill(const StairProfile& profile);

/// The textbook cap-limited recurrence solved by bisecting the water level
/// until the budget is met. Kept for comparison; on flat channels it
/// produces the characteristic alternating power pattern, so the closed
/// solver above is what schedulers use.
WaterfillResult adjacent_waterfill_literal(const StairProfile& profile);

/// Runs adjacent_waterfill for every start index and returns the best case
/// (ties broken toward the smallest start).
struct BestStartResult {
  Eigen::Index start = 0;
  WaterfillResult fill;
};
BestStartResult best_start(const Eigen::ArrayXd& depths_w, double budget_w,
                           double bandwidth_hz, int* wf_call_counter = nullptr);

/// Divides a rate budget across users to maximise sum_i ln(1 + r_i / w_i),
/// weights ascending. Users beyond the break index get zero; the rest share
/// one water level mu = w_i + r_i.
Eigen::ArrayXd geometric_waterfill(const Eigen::ArrayXd& sorted_weights, double budget);

/// Iterated geometric water-filling with per-user caps: users whose fair
/// share exceeds their cap are clamped, removed from the active set and the
/// budget shrunk by the clamped amount, until no cap is exceeded. Weights
/// may be in any order here; rates come back in the callers' order.
struct CappedRateResult {
  Eigen::ArrayXd rates;
  std::vector<int> clamped;  // indices held at their cap
  int rounds = 0;
};
CappedRateResult capped_rate_adjust(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& caps,
                                    double budget);

/// Exhaustive discretised search over feasible power vectors; the
/// independent optimum check for adjacent_waterfill. Refuses profiles with
/// more than four stairs.
WaterfillResult waterfill_grid_oracle(const StairProfile& profile, int steps = 120);

}  // namespace pfsim
