// SPDX-License-Identifier: Apache-2.0
#include "pfsim/scheduler.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "pfsim/waterfill.hpp"

namespace pfsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_state(const NetworkState& state, const SchedulerConfig& config) {
  if (state.num_subchannels() < 1) {
    throw std::invalid_argument("scheduler: need at least one subchannel");
  }
  if (state.num_cues() + state.num_d2d() < 1) {
    throw std::invalid_argument("scheduler: need at least one user");
  }
  if (state.gains.num_endpoints() != state.num_endpoints()) {
    throw std::invalid_argument("scheduler: gain tensor does not match the user population");
  }
  if (config.window < 1) throw std::domain_error("scheduler: window must be >= 1");
  if (config.max_passes < 1) throw std::domain_error("scheduler: max_passes must be >= 1");
  if (config.window >= 2) {
    for (const auto& u : state.cues) {
      if (!(u.avg_rate_bps > 0.0)) {
        throw std::domain_error("scheduler: average rates must be positive for window >= 2");
      }
    }
    for (const auto& p : state.d2d) {
      if (!(p.avg_rate_bps > 0.0)) {
        throw std::domain_error("scheduler: average rates must be positive for window >= 2");
      }
    }
  }
}

Eigen::ArrayXd cue_avgs(const NetworkState& state) {
  Eigen::ArrayXd avg(state.num_cues());
  for (int i = 0; i < state.num_cues(); ++i) avg(i) = state.cues[i].avg_rate_bps;
  return avg;
}

Eigen::ArrayXd d2d_avgs(const NetworkState& state) {
  Eigen::ArrayXd avg(state.num_d2d());
  for (int j = 0; j < state.num_d2d(); ++j) avg(j) = state.d2d[j].avg_rate_bps;
  return avg;
}

/// Rate-adjustment stair depths (T-1)*avg; all-zero at T=1, which turns the
/// geometric water-fill into an equal split, the ln-rate optimum.
Eigen::ArrayXd adjust_weights(const Eigen::ArrayXd& avg, int window) {
  return static_cast<double>(window - 1) * avg;
}

/// User pick order for the allocation phases: ascending (T-1)*avg, with the
/// plain average breaking the degenerate T=1 case.
Eigen::ArrayXd selection_weights(const Eigen::ArrayXd& avg, int window) {
  return window == 1 ? avg : adjust_weights(avg, window);
}

struct TierAllocation {
  Eigen::ArrayXXi assign;
  Eigen::ArrayXXd power;
  Eigen::ArrayXd caps;  // per-user water-filled maximum rates
  long wf_calls = 0;
};

/// Greedy allocation phase for one tier: users in ascending weight order
/// each take their best contiguous water-filled block, and the stairs they
/// take are blocked for everyone after them.
TierAllocation allocate_tier(int num_users, int num_ch, const Eigen::ArrayXd& weights,
                             const std::vector<double>& power_budgets,
                             const std::function<Eigen::ArrayXd(int)>& depths_for,
                             double bandwidth_hz) {
  TierAllocation out;
  out.assign = Eigen::ArrayXXi::Zero(num_users, num_ch);
  out.power = Eigen::ArrayXXd::Zero(num_users, num_ch);
  out.caps = Eigen::ArrayXd::Zero(num_users);

  std::vector<char> taken(static_cast<std::size_t>(num_ch), 0);
  std::vector<char> done(static_cast<std::size_t>(num_users), 0);

  for (int round = 0; round < num_users; ++round) {
    int pick = -1;
    for (int i = 0; i < num_users; ++i) {
      if (!done[static_cast<std::size_t>(i)] && (pick < 0 || weights(i) < weights(pick))) pick = i;
    }
    done[static_cast<std::size_t>(pick)] = 1;

    Eigen::ArrayXd depths = depths_for(pick);
    for (int k = 0; k < num_ch; ++k) {
      if (taken[static_cast<std::size_t>(k)]) depths(k) = kInf;
    }

    int calls = 0;
    try {
      const BestStartResult best =
          best_start(depths, power_budgets[static_cast<std::size_t>(pick)], bandwidth_hz, &calls);
      for (Eigen::Index k = best.fill.block_begin; k < best.fill.block_end; ++k) {
        out.assign(pick, k) = 1;
        out.power(pick, k) = best.fill.powers_w(k);
        taken[static_cast<std::size_t>(k)] = 1;
      }
      out.caps(pick) = best.fill.rate_bps;
    } catch (const NoFeasibleChannel&) {
      // every subchannel blocked for this user: empty allocation, zero rate
    }
    out.wf_calls += calls;
  }
  return out;
}

RateVector adjust_tier(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& caps, double budget) {
  const CappedRateResult adjusted = capped_rate_adjust(weights, caps, budget);
  RateVector rv;
  rv.rates_bps = adjusted.rates;
  rv.caps_bps = caps;
  rv.clamped = adjusted.clamped;
  return rv;
}

/// Interference arriving at the eNB on each subchannel from the D2D tier's
/// transmit powers (plus anything from outside the cell).
Eigen::ArrayXd enb_interference(const NetworkState& state, const Eigen::ArrayXXd& d2d_power) {
  const int num_ch = state.num_subchannels();
  Eigen::ArrayXd interference(num_ch);
  for (int k = 0; k < num_ch; ++k) {
    double sum = state.ext_at_enb(k);
    for (int j = 0; j < state.num_d2d(); ++j) {
      if (d2d_power.size() > 0 && d2d_power(j, k) > 0.0) {
        sum += d2d_power(j, k) * state.gains(state.d2d_tx_endpoint(j), NetworkState::kEnbEndpoint, k);
      }
    }
    interference(k) = sum;
  }
  return interference;
}

/// Interference at each D2D receiver from the CUE tier's transmit powers.
Eigen::ArrayXXd d2drx_interference(const NetworkState& state, const Eigen::ArrayXXd& cue_power) {
  const int num_ch = state.num_subchannels();
  Eigen::ArrayXXd interference(state.num_d2d(), num_ch);
  for (int j = 0; j < state.num_d2d(); ++j) {
    for (int k = 0; k < num_ch; ++k) {
      double sum = state.ext_at_d2drx(j, k);
      for (int i = 0; i < state.num_cues(); ++i) {
        if (cue_power.size() > 0 && cue_power(i, k) > 0.0) {
          sum += cue_power(i, k) * state.gains(state.cue_endpoint(i), state.d2d_rx_endpoint(j), k);
        }
      }
      interference(j, k) = sum;
    }
  }
  return interference;
}

Eigen::ArrayXd depths_from(const Eigen::ArrayXd& signal_gains, const Eigen::ArrayXd& interference,
                           double noise_w) {
  Eigen::ArrayXd depths(signal_gains.size());
  for (Eigen::Index k = 0; k < signal_gains.size(); ++k) {
    depths(k) = signal_gains(k) > 0.0 ? (noise_w + interference(k)) / signal_gains(k) : kInf;
  }
  return depths;
}

}  // namespace

ScheduleOutcome heuristic_pf_schedule(const NetworkState& state, const SchedulerConfig& config) {
  check_state(state, config);

  const int num_ch = state.num_subchannels();
  const int num_cues = state.num_cues();
  const int num_d2d = state.num_d2d();
  const double noise_w = state.gains.noise_power_w();
  const double bandwidth = state.gains.bandwidth_hz;

  const Eigen::ArrayXd avg_c = cue_avgs(state);
  const Eigen::ArrayXd avg_d = d2d_avgs(state);
  const Eigen::ArrayXd sel_c = selection_weights(avg_c, config.window);
  const Eigen::ArrayXd sel_d = selection_weights(avg_d, config.window);
  const Eigen::ArrayXd adj_c = adjust_weights(avg_c, config.window);
  const Eigen::ArrayXd adj_d = adjust_weights(avg_d, config.window);

  std::vector<double> cue_budgets, d2d_budgets;
  for (const auto& u : state.cues) cue_budgets.push_back(u.max_power_w);
  for (const auto& p : state.d2d) d2d_budgets.push_back(p.max_power_w);

  ScheduleOutcome outcome;
  OpCounter ops;

  Eigen::ArrayXXd d2d_power_prev = Eigen::ArrayXXd::Zero(num_d2d, num_ch);
  Eigen::ArrayXXi prev_cue_assign, prev_d2d_assign;

  TierAllocation cue_tier, d2d_tier;
  for (int pass = 1; pass <= config.max_passes; ++pass) {
    // Phase 1: CUE subchannel allocation against the D2D powers of the
    // previous pass (zero interference on the first pass).
    const Eigen::ArrayXd interference_enb = enb_interference(state, d2d_power_prev);
    auto cue_depths = [&](int i) {
      Eigen::ArrayXd g(num_ch);
      for (int k = 0; k < num_ch; ++k) {
        g(k) = state.gains(state.cue_endpoint(i), NetworkState::kEnbEndpoint, k);
      }
      return depths_from(g, interference_enb, noise_w);
    };
    cue_tier = allocate_tier(num_cues, num_ch, sel_c, cue_budgets, cue_depths, bandwidth);

    // Phase 2: CUE rate adjustment against the tier rate budget.
    outcome.cue_rates = adjust_tier(adj_c, cue_tier.caps, config.tier_rate_budget_cue_bps);

    // Phase 3: D2D subchannel allocation against the CUE powers just fixed.
    const Eigen::ArrayXXd interference_rx = d2drx_interference(state, cue_tier.power);
    auto d2d_depths = [&](int j) {
      Eigen::ArrayXd g(num_ch);
      for (int k = 0; k < num_ch; ++k) {
        g(k) = state.gains(state.d2d_tx_endpoint(j), state.d2d_rx_endpoint(j), k);
      }
      return depths_from(g, interference_rx.row(j).transpose(), noise_w);
    };
    d2d_tier = allocate_tier(num_d2d, num_ch, sel_d, d2d_budgets, d2d_depths, bandwidth);

    // Phase 4: D2D rate adjustment.
    outcome.d2d_rates = adjust_tier(adj_d, d2d_tier.caps, config.tier_rate_budget_d2d_bps);

    ops.passes.push_back({cue_tier.wf_calls, d2d_tier.wf_calls});
    outcome.iterations_used = pass;
    d2d_power_prev = d2d_tier.power;

    const bool converged = pass >= 2 && (cue_tier.assign == prev_cue_assign).all() &&
                           (d2d_tier.assign == prev_d2d_assign).all();
    prev_cue_assign = cue_tier.assign;
    prev_d2d_assign = d2d_tier.assign;
    if (converged) break;
  }

  outcome.allocation.cue_assign = cue_tier.assign;
  outcome.allocation.cue_power = cue_tier.power;
  outcome.allocation.d2d_assign = d2d_tier.assign;
  outcome.allocation.d2d_power = d2d_tier.power;
  outcome.utility = pf_utility(outcome.cue_rates.rates_bps, outcome.d2d_rates.rates_bps, avg_c,
                               avg_d, config.window);
  if (config.instrument) outcome.ops = std::move(ops);
  return outcome;
}

namespace {

struct Block {
  int begin = 0;
  int end = 0;  // [begin, end); empty when equal
  bool empty() const { return begin == end; }
};

/// Enumerates all assignments of disjoint contiguous blocks (empty allowed)
/// to the users of one tier, in a fixed order: per user, empty first, then
/// blocks by (begin, end).
void for_each_tier_pattern(int num_users, int num_ch, std::vector<Block>& pattern,
                           std::vector<char>& occupied, int user,
                           const std::function<void(const std::vector<Block>&)>& emit) {
  if (user == num_users) {
    emit(pattern);
    return;
  }
  pattern[static_cast<std::size_t>(user)] = Block{0, 0};
  for_each_tier_pattern(num_users, num_ch, pattern, occupied, user + 1, emit);

  for (int begin = 0; begin < num_ch; ++begin) {
    if (occupied[static_cast<std::size_t>(begin)]) continue;
    for (int end = begin + 1; end <= num_ch; ++end) {
      if (occupied[static_cast<std::size_t>(end - 1)]) break;
      pattern[static_cast<std::size_t>(user)] = Block{begin, end};
      for (int k = begin; k < end; ++k) occupied[static_cast<std::size_t>(k)] = 1;
      for_each_tier_pattern(num_users, num_ch, pattern, occupied, user + 1, emit);
      for (int k = begin; k < end; ++k) occupied[static_cast<std::size_t>(k)] = 0;
    }
  }
  pattern[static_cast<std::size_t>(user)] = Block{0, 0};
}

/// Water-fills every user of a tier inside its pattern block.
struct TierEvaluation {
  Eigen::ArrayXXd power;
  Eigen::ArrayXd caps;
};

TierEvaluation evaluate_blocks(const std::vector<Block>& pattern, int num_ch,
                               const std::function<Eigen::ArrayXd(int)>& depths_for,
                               const std::vector<double>& power_budgets, double bandwidth_hz) {
  const int num_users = static_cast<int>(pattern.size());
  TierEvaluation ev;
  ev.power = Eigen::ArrayXXd::Zero(num_users, num_ch);
  ev.caps = Eigen::ArrayXd::Zero(num_users);
  for (int i = 0; i < num_users; ++i) {
    const Block& block = pattern[static_cast<std::size_t>(i)];
    if (block.empty()) continue;
    Eigen::ArrayXd depths = depths_for(i);
    for (int k = 0; k < num_ch; ++k) {
      if (k < block.begin || k >= block.end) depths(k) = kInf;
    }
    StairProfile profile{depths, power_budgets[static_cast<std::size_t>(i)],
                         static_cast<Eigen::Index>(block.begin), bandwidth_hz};
    WaterfillResult fill;
    try {
      fill = adjacent_waterfill(profile);
    } catch (const NoFeasibleChannel&) {
      continue;
    }
    for (Eigen::Index k = fill.block_begin; k < fill.block_end; ++k) {
      ev.power(i, k) = fill.powers_w(k);
    }
    ev.caps(i) = fill.rate_bps;
  }
  return ev;
}

}  // namespace

double count_tier_patterns(int num_users, int num_ch) {
  if (num_users < 0 || num_ch < 0) {
    throw std::invalid_argument("count_tier_patterns: negative argument");
  }
  // ways(k, j): placements of j unordered disjoint intervals in the first k
  // slots (touching intervals allowed). An interval ending at slot k-1
  // contributes ways(s, j-1) for its start s.
  const int max_j = std::min(num_users, num_ch);
  std::vector<std::vector<double>> ways(static_cast<std::size_t>(num_ch + 1),
                                        std::vector<double>(static_cast<std::size_t>(max_j + 1), 0.0));
  for (int k = 0; k <= num_ch; ++k) ways[static_cast<std::size_t>(k)][0] = 1.0;
  for (int j = 1; j <= max_j; ++j) {
    double prefix = 0.0;  // sum over s of ways(s, j-1)
    for (int k = 1; k <= num_ch; ++k) {
      prefix += ways[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)];
      ways[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          ways[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)] + prefix;
    }
  }

  double total = 0.0;
  double ordered_users = 1.0;  // num_users! / (num_users - j)!
  for (int j = 0; j <= max_j; ++j) {
    if (j > 0) ordered_users *= static_cast<double>(num_users - j + 1);
    total += ways[static_cast<std::size_t>(num_ch)][static_cast<std::size_t>(j)] * ordered_users;
  }
  return total;
}

double count_joint_patterns(int num_cues, int num_d2d, int num_subchannels) {
  return count_tier_patterns(num_cues, num_subchannels) *
         count_tier_patterns(num_d2d, num_subchannels);
}

ScheduleOutcome optimal_pf_schedule(const NetworkState& state, const SchedulerConfig& config) {
  check_state(state, config);

  const int num_ch = state.num_subchannels();
  const int num_cues = state.num_cues();
  const int num_d2d = state.num_d2d();
  const double joint = count_joint_patterns(num_cues, num_d2d, num_ch);
  if (joint > config.enumeration_limit) throw EnumerationLimitExceeded(joint);

  const double noise_w = state.gains.noise_power_w();
  const double bandwidth = state.gains.bandwidth_hz;
  const Eigen::ArrayXd avg_c = cue_avgs(state);
  const Eigen::ArrayXd avg_d = d2d_avgs(state);
  const Eigen::ArrayXd adj_c = adjust_weights(avg_c, config.window);
  const Eigen::ArrayXd adj_d = adjust_weights(avg_d, config.window);

  std::vector<double> cue_budgets, d2d_budgets;
  for (const auto& u : state.cues) cue_budgets.push_back(u.max_power_w);
  for (const auto& p : state.d2d) d2d_budgets.push_back(p.max_power_w);

  const Eigen::ArrayXd interference_enb = enb_interference(state, Eigen::ArrayXXd());
  auto cue_depths = [&](int i) {
    Eigen::ArrayXd g(num_ch);
    for (int k = 0; k < num_ch; ++k) {
      g(k) = state.gains(state.cue_endpoint(i), NetworkState::kEnbEndpoint, k);
    }
    return depths_from(g, interference_enb, noise_w);
  };

  double best_utility = -kInf;
  bool have_best = false;
  std::vector<Block> best_cue_pattern, best_d2d_pattern;
  long patterns = 0;

  std::vector<Block> cue_pattern(static_cast<std::size_t>(num_cues));
  std::vector<char> cue_occupied(static_cast<std::size_t>(num_ch), 0);
  std::vector<Block> d2d_pattern(static_cast<std::size_t>(num_d2d));
  std::vector<char> d2d_occupied(static_cast<std::size_t>(num_ch), 0);

  for_each_tier_pattern(num_cues, num_ch, cue_pattern, cue_occupied, 0, [&](const std::vector<Block>& cp) {
    const TierEvaluation cue_ev =
        evaluate_blocks(cp, num_ch, cue_depths, cue_budgets, bandwidth);
    const RateVector cue_rates =
        adjust_tier(adj_c, cue_ev.caps, config.tier_rate_budget_cue_bps);
    const double utility_cue =
        pf_tier_utility(cue_rates.rates_bps, avg_c, config.window);

    const Eigen::ArrayXXd interference_rx = d2drx_interference(state, cue_ev.power);
    auto d2d_depths = [&](int j) {
      Eigen::ArrayXd g(num_ch);
      for (int k = 0; k < num_ch; ++k) {
        g(k) = state.gains(state.d2d_tx_endpoint(j), state.d2d_rx_endpoint(j), k);
      }
      return depths_from(g, interference_rx.row(j).transpose(), noise_w);
    };

    for_each_tier_pattern(num_d2d, num_ch, d2d_pattern, d2d_occupied, 0,
                          [&](const std::vector<Block>& dp) {
      ++patterns;
      const TierEvaluation d2d_ev =
          evaluate_blocks(dp, num_ch, d2d_depths, d2d_budgets, bandwidth);
      const RateVector d2d_rates =
          adjust_tier(adj_d, d2d_ev.caps, config.tier_rate_budget_d2d_bps);
      const double utility =
          utility_cue + pf_tier_utility(d2d_rates.rates_bps, avg_d, config.window);
      if (!have_best || utility > best_utility) {
        have_best = true;
        best_utility = utility;
        best_cue_pattern = cp;
        best_d2d_pattern = dp;
      }
    });
  });

  // Rebuild the winning pattern.
  const TierEvaluation cue_ev =
      evaluate_blocks(best_cue_pattern, num_ch, cue_depths, cue_budgets, bandwidth);
  const Eigen::ArrayXXd interference_rx = d2drx_interference(state, cue_ev.power);
  auto d2d_depths = [&](int j) {
    Eigen::ArrayXd g(num_ch);
    for (int k = 0; k < num_ch; ++k) {
      g(k) = state.gains(state.d2d_tx_endpoint(j), state.d2d_rx_endpoint(j), k);
    }
    return depths_from(g, interference_rx.row(j).transpose(), noise_w);
  };
  const TierEvaluation d2d_ev =
      evaluate_blocks(best_d2d_pattern, num_ch, d2d_depths, d2d_budgets, bandwidth);

  ScheduleOutcome outcome;
  outcome.allocation = Allocation::zero(num_cues, num_d2d, num_ch);
  for (int i = 0; i < num_cues; ++i) {
    const Block& b = best_cue_pattern[static_cast<std::size_t>(i)];
    for (int k = b.begin; k < b.end; ++k) outcome.allocation.cue_assign(i, k) = 1;
  }
  for (int j = 0; j < num_d2d; ++j) {
    const Block& b = best_d2d_pattern[static_cast<std::size_t>(j)];
    for (int k = b.begin; k < b.end; ++k) outcome.allocation.d2d_assign(j, k) = 1;
  }
  outcome.allocation.cue_power = cue_ev.power;
  outcome.allocation.d2d_power = d2d_ev.power;
  outcome.cue_rates = adjust_tier(adj_c, cue_ev.caps, config.tier_rate_budget_cue_bps);
  outcome.d2d_rates = adjust_tier(adj_d, d2d_ev.caps, config.tier_rate_budget_d2d_bps);
  outcome.utility = pf_utility(outcome.cue_rates.rates_bps, outcome.d2d_rates.rates_bps, avg_c,
                               avg_d, config.window);
  outcome.iterations_used = 1;
  if (config.instrument) {
    OpCounter ops;
    ops.patterns_enumerated = patterns;
    outcome.ops = std::move(ops);
  }
  return outcome;
}

double complexity_estimate(SchedulerKind kind, int num_cues, int num_d2d, int num_subchannels,
                           int passes) {
  if (num_subchannels < 1 || passes < 1 || num_cues < 0 || num_d2d < 0) {
    throw std::invalid_argument("complexity_estimate: arguments out of range");
  }
  const double nc = num_cues, nd = num_d2d, k = num_subchannels;
  if (kind == SchedulerKind::kOptimal) {
    return std::pow(nc + nd, k);
  }
  const double per_channel = k * std::log2(k) + 5.0 * k;
  const double per_user = nc * nc * (nc + 1.0) / 2.0 + nd * nd * (nd + 1.0) / 2.0;
  return per_channel * per_user * static_cast<double>(passes);
}

std::vector<OpCounter::PerPass> count_wf_calls(const ScheduleOutcome& outcome) {
  if (!outcome.ops) {
    throw std::logic_error("count_wf_calls: outcome was produced without instrumentation");
  }
  return outcome.ops->passes;
}

}  // namespace pfsim
