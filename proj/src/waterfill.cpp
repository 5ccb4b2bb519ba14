// SPDX-License-Identifier: Apache-2.0
#include "pfsim/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace pfsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_profile(const StairProfile& profile) {
  if (profile.size() < 1) throw std::invalid_argument("waterfill: empty stair profile");
  if (profile.start < 0 || profile.start >= profile.size()) {
    throw std::invalid_argument("waterfill: start index out of range");
  }
  if (!(profile.budget_w > 0.0) || !std::isfinite(profile.budget_w)) {
    throw std::invalid_argument("waterfill: power budget must be positive and finite");
  }
  if (!(profile.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("waterfill: bandwidth must be positive");
  }
  for (Eigen::Index k = 0; k < profile.size(); ++k) {
    if (!(profile.depths_w(k) > 0.0)) {
      throw std::invalid_argument("waterfill: stair depths must be positive (or +inf)");
    }
  }
}

bool all_blocked_from(const StairProfile& profile, Eigen::Index start) {
  for (Eigen::Index k = start; k < profile.size(); ++k) {
    if (!profile.blocked(k)) return false;
  }
  return true;
}

WaterfillResult empty_result(const StairProfile& profile) {
  WaterfillResult r;
  r.powers_w = Eigen::ArrayXd::Zero(profile.size());
  r.block_begin = profile.start;
  r.block_end = profile.start;
  return r;
}

double rate_from_powers(const StairProfile& profile, const Eigen::ArrayXd& powers,
                        Eigen::Index begin, Eigen::Index end) {
  double sum = 0.0;
  for (Eigen::Index k = begin; k < end; ++k) {
    sum += std::log2(1.0 + powers(k) / profile.depths_w(k));
  }
  return profile.bandwidth_hz * sum;
}

}  // namespace

WaterfillResult adjacent_waterfill(const StairProfile& profile) {
  check_profile(profile);
  if (all_blocked_from(profile, profile.start)) throw NoFeasibleChannel();
  if (profile.blocked(profile.start)) return empty_result(profile);

  const Eigen::Index start = profile.start;
  const Eigen::Index max_len = profile.size() - start;

  // Per block position i (stair start + i): floor(i) is the running maximum
  // of the depths, the lowest height the adjacency constraint admits once
  // stair start + i is part of the block.
  std::vector<double> floor_v, pref_floor{0.0}, pref_log_floor{0.0}, pref_log_depth{0.0};
  floor_v.reserve(static_cast<std::size_t>(max_len));

  double sum_depth = 0.0;
  double best_rate = 0.0;
  Eigen::Index best_len = 0;
  double best_level = 0.0;

  for (Eigen::Index i = 0; i < max_len; ++i) {
    const double depth = profile.depths_w(start + i);
    if (!std::isfinite(depth)) break;  // a block cannot span a blocked stair

    const double floor_i = i == 0 ? depth : std::max(floor_v.back(), depth);
    floor_v.push_back(floor_i);
    pref_floor.push_back(pref_floor.back() + floor_i);
    pref_log_floor.push_back(pref_log_floor.back() + std::log2(floor_i));
    pref_log_depth.push_back(pref_log_depth.back() + std::log2(depth));
    sum_depth += depth;

    const Eigen::Index len = i + 1;
    const double target = profile.budget_w + sum_depth;  // sum of heights at this block size
    if (target <= pref_floor[static_cast<std::size_t>(len)]) break;  // floors exhaust the budget

    // Water level: the largest j in [1, len] with j*floor(j-1) + suffix-floor
    // sum <= target marks how many stairs sit strictly under water.
    Eigen::Index lo = 1, hi = len;
    while (lo < hi) {
      const Eigen::Index mid = (lo + hi + 1) / 2;
      const double level_sum = static_cast<double>(mid) * floor_v[static_cast<std::size_t>(mid - 1)] +
                               (pref_floor[static_cast<std::size_t>(len)] -
                                pref_floor[static_cast<std::size_t>(mid)]);
      if (level_sum <= target) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    const Eigen::Index submerged = lo;
    const double level =
        (target - (pref_floor[static_cast<std::size_t>(len)] -
                   pref_floor[static_cast<std::size_t>(submerged)])) /
        static_cast<double>(submerged);
    if (!(level > floor_v.front())) continue;  // first stair must get water

    const double rate = static_cast<double>(submerged) * std::log2(level) +
                        (pref_log_floor[static_cast<std::size_t>(len)] -
                         pref_log_floor[static_cast<std::size_t>(submerged)]) -
                        pref_log_depth[static_cast<std::size_t>(len)];
    if (rate > best_rate) {
      best_rate = rate;
      best_len = len;
      best_level = level;
    }
  }

  if (best_len == 0) return empty_result(profile);

  WaterfillResult result;
  result.powers_w = Eigen::ArrayXd::Zero(profile.size());
  result.block_begin = start;
  result.block_end = start + best_len;
  result.water_level_w = best_level;
  for (Eigen::Index i = 0; i < best_len; ++i) {
    const double height = std::max(best_level, floor_v[static_cast<std::size_t>(i)]);
    result.powers_w(start + i) = std::max(0.0, height - profile.depths_w(start + i));
  }
  // Rounding can make an equal-rate longer block win by one ulp; dry
  // trailing stairs add nothing, so hand them back.
  while (result.block_end > result.block_begin && result.powers_w(result.block_end - 1) == 0.0) {
    --result.block_end;
  }
  if (result.block_end == result.block_begin) return empty_result(profile);
  result.rate_bps = rate_from_powers(profile, result.powers_w, start, result.block_end);
  return result;
}

WaterfillResult adjacent_waterfill_literal(const StairProfile& profile) {
  check_profile(profile);
  if (all_blocked_from(profile, profile.start)) throw NoFeasibleChannel();
  if (profile.blocked(profile.start)) return empty_result(profile);

  const Eigen::Index start = profile.start;
  const Eigen::Index size = profile.size();

  auto powers_at = [&](double level, Eigen::ArrayXd& powers) {
    powers.setZero();
    double total = 0.0;
    double prev_power = 0.0, prev_depth = 0.0;
    for (Eigen::Index k = start; k < size; ++k) {
      const double depth = profile.depths_w(k);
      double p;
      if (!std::isfinite(depth)) {
        p = 0.0;
      } else if (k == start) {
        p = std::max(0.0, level - depth);
      } else {
        p = std::max(0.0, level - prev_power - prev_depth + depth);
      }
      powers(k) = p;
      total += p;
      prev_power = p;
      prev_depth = std::isfinite(depth) ? depth : prev_depth;
    }
    return total;
  };

  Eigen::ArrayXd powers(size);
  double lo = 0.0;
  double hi = profile.depths_w(start) + profile.budget_w;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double total = powers_at(mid, powers);
    if (total > profile.budget_w) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (std::abs(total - profile.budget_w) <= 1e-9 * profile.budget_w) break;
  }
  powers_at(lo, powers);

  WaterfillResult result;
  result.powers_w = powers;
  result.water_level_w = lo;
  result.block_begin = start;
  result.block_end = start;
  for (Eigen::Index k = start; k < size; ++k) {
    if (powers(k) > 0.0) result.block_end = k + 1;
  }
  if (result.block_end == start) return empty_result(profile);
  result.rate_bps = rate_from_powers(profile, powers, start, result.block_end);
  return result;
}

BestStartResult best_start(const Eigen::ArrayXd& depths_w, double budget_w, double bandwidth_hz,
                           int* wf_call_counter) {
  if (depths_w.size() < 1) throw std::invalid_argument("best_start: empty depth vector");

  BestStartResult best;
  best.start = 0;
  bool any_feasible = false;
  for (Eigen::Index k = 0; k < depths_w.size(); ++k) {
    if (wf_call_counter) ++*wf_call_counter;
    StairProfile profile{depths_w, budget_w, k, bandwidth_hz};
    WaterfillResult fill;
    try {
      fill = adjacent_waterfill(profile);
    } catch (const NoFeasibleChannel&) {
      continue;
    }
    if (fill.empty()) continue;
    if (!any_feasible || fill.rate_bps > best.fill.rate_bps) {
      best.start = k;
      best.fill = fill;
      any_feasible = true;
    }
  }
  if (!any_feasible) throw NoFeasibleChannel();
  return best;
}

Eigen::ArrayXd geometric_waterfill(const Eigen::ArrayXd& sorted_weights, double budget) {
  const Eigen::Index n = sorted_weights.size();
  if (budget < 0.0) throw std::domain_error("geometric_waterfill: negative budget");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sorted_weights(i) < 0.0) {
      throw std::domain_error("geometric_waterfill: negative weight");
    }
    if (i > 0 && sorted_weights(i) < sorted_weights(i - 1)) {
      throw std::invalid_argument("geometric_waterfill: weights must be sorted ascending");
    }
  }

  Eigen::ArrayXd rates = Eigen::ArrayXd::Zero(n);
  if (n == 0 || budget == 0.0) return rates;

  // break index: the last user whose stair still sits below the water once
  // the budget is spread over everyone shallower.
  Eigen::Index active = 0;
  double pref = 0.0;  // sum of the first `active` weights
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deficit = static_cast<double>(i) * sorted_weights(i) - pref;
    if (budget - deficit > 0.0) {
      active = i + 1;
      pref += sorted_weights(i);
    } else {
      break;
    }
  }

  const double top_weight = sorted_weights(active - 1);
  const double deficit = static_cast<double>(active - 1) * top_weight -
                         (pref - top_weight);
  const double top_rate = (budget - deficit) / static_cast<double>(active);
  for (Eigen::Index i = 0; i < active; ++i) {
    rates(i) = top_rate + (top_weight - sorted_weights(i));
  }
  return rates;
}

CappedRateResult capped_rate_adjust(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& caps,
                                    double budget) {
  const Eigen::Index n = weights.size();
  if (caps.size() != n) throw std::invalid_argument("capped_rate_adjust: size mismatch");
  if (budget < 0.0) throw std::domain_error("capped_rate_adjust: negative budget");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (caps(i) < 0.0) throw std::domain_error("capped_rate_adjust: negative cap");
  }

  CappedRateResult result;
  result.rates = Eigen::ArrayXd::Zero(n);
  if (n == 0) return result;

  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), 0);
  std::stable_sort(active.begin(), active.end(), [&](Eigen::Index a, Eigen::Index b) {
    return weights(a) < weights(b);
  });

  double remaining = budget;
  while (!active.empty()) {
    ++result.rounds;
    Eigen::ArrayXd w(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) w(static_cast<Eigen::Index>(i)) = weights(active[i]);

    Eigen::ArrayXd share;
    if (std::isinf(remaining)) {
      share = Eigen::ArrayXd::Constant(w.size(), kInf);
    } else {
      share = geometric_waterfill(w, remaining);
    }

    std::vector<Eigen::Index> keep;
    double clamped_sum = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Eigen::Index user = active[i];
      const double r = share(static_cast<Eigen::Index>(i));
      if (r > caps(user)) {
        result.rates(user) = caps(user);
        result.clamped.push_back(static_cast<int>(user));
        clamped_sum += caps(user);
      } else {
        result.rates(user) = r;
        keep.push_back(user);
      }
    }
    if (keep.size() == active.size()) break;  // no cap exceeded
    active = std::move(keep);
    if (!std::isinf(remaining)) remaining = std::max(0.0, remaining - clamped_sum);
  }
  std::sort(result.clamped.begin(), result.clamped.end());
  return result;
}

WaterfillResult waterfill_grid_oracle(const StairProfile& profile, int steps) {
  check_profile(profile);
  if (profile.size() > 4) {
    throw std::invalid_argument("waterfill_grid_oracle: refusing profiles with more than 4 stairs");
  }
  if (all_blocked_from(profile, profile.start)) throw NoFeasibleChannel();

  const Eigen::Index start = profile.start;
  const Eigen::Index size = profile.size();
  const Eigen::Index stairs = size - start;
  if (steps <= 0) {
    steps = stairs <= 2 ? 1000 : (stairs == 3 ? 150 : 48);
  }
  const double delta = profile.budget_w / static_cast<double>(steps);

  Eigen::ArrayXd powers = Eigen::ArrayXd::Zero(size);
  WaterfillResult best = empty_result(profile);
  double best_rate = -1.0;

  // Recursively assign grid powers to stairs start..size-1, then keep the
  // best vector whose positive run starts at `start` and whose heights are
  // non-decreasing over the hull.
  auto evaluate = [&]() {
    Eigen::Index last_pos = -1, first_pos = -1;
    for (Eigen::Index k = start; k < size; ++k) {
      if (powers(k) > 0.0) {
        if (first_pos < 0) first_pos = k;
        last_pos = k;
      }
    }
    if (first_pos < 0) {
      if (best_rate < 0.0) {
        best_rate = 0.0;
        best = empty_result(profile);
      }
      return;
    }
    if (first_pos != start) return;
    double prev_height = 0.0;
    for (Eigen::Index k = start; k <= last_pos; ++k) {
      if (profile.blocked(k)) return;
      const double height = powers(k) + profile.depths_w(k);
      if (height + 1e-12 * std::max(1.0, std::abs(prev_height)) < prev_height) return;
      prev_height = height;
    }
    const double rate = rate_from_powers(profile, powers, start, last_pos + 1);
    if (rate > best_rate) {
      best_rate = rate;
      best.powers_w = powers;
      best.block_begin = start;
      best.block_end = last_pos + 1;
      best.rate_bps = rate;
      best.water_level_w = powers(last_pos) + profile.depths_w(last_pos);
    }
  };

  std::function<void(Eigen::Index, int)> recurse = [&](Eigen::Index k, int units_left) {
    if (k == size) {
      evaluate();
      return;
    }
    if (profile.blocked(k)) {
      powers(k) = 0.0;
      recurse(k + 1, units_left);
      return;
    }
    for (int u = 0; u <= units_left; ++u) {
      powers(k) = static_cast<double>(u) * delta;
      recurse(k + 1, units_left - u);
    }
    powers(k) = 0.0;
  };
  recurse(start, steps);
  return best;
}

}  // namespace pfsim
