// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pfsim/types.hpp"

namespace pfsim {

/// One broken allocation invariant, with enough context to point at the
/// offending user/subchannel.
struct Violation {
  enum class Kind { kDimension, kExclusivity, kAdjacency, kPowerBudget, kPowerOutsideAssign };
  Kind kind;
  std::string tier;  // "cue" or "d2d"
  int user = -1;
  int subchannel = -1;
  std::string detail;
};

std::string to_string(const Violation& v);

/// Checks per-tier exclusivity, per-user adjacency, the per-user power
/// budget and that power is only spent on assigned subchannels. Empty
/// result means the allocation is valid.
std::vector<Violation> validate_allocation(const Allocation& alloc, const NetworkState& state);

/// Proportional-fair objective over both tiers.
///
/// window == 1 sums ln(rate) and returns -infinity as soon as any user has
/// zero rate; window >= 2 sums ln(1 + rate / ((window-1) * avg)).
double pf_utility(const Eigen::ArrayXd& cue_rates, const Eigen::ArrayXd& d2d_rates,
                  const Eigen::ArrayXd& cue_avg, const Eigen::ArrayXd& d2d_avg, int window);

/// One tier's share of the objective; pf_utility is the sum of the two.
double pf_tier_utility(const Eigen::ArrayXd& rates, const Eigen::ArrayXd& avg, int window);

/// Exponential moving average with window T: avg' = (1 - 1/T) avg + r / T.
Eigen::ArrayXd update_avg_rates(const Eigen::ArrayXd& avg, const Eigen::ArrayXd& achieved,
                                int window);

}  // namespace pfsim
