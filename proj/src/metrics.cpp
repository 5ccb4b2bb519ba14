// SPDX-License-Identifier: Apache-2.0
#include "pfsim/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pfsim {
namespace {

constexpr double kPowerBudgetRelTol = 1e-9;

void check_tier(const Eigen::ArrayXXi& assign, const Eigen::ArrayXXd& power,
                const std::vector<double>& budgets, const std::string& tier,
                std::vector<Violation>& out) {
  const int num_users = static_cast<int>(assign.rows());
  const int num_ch = static_cast<int>(assign.cols());

  for (int k = 0; k < num_ch; ++k) {
    int holders = 0;
    for (int i = 0; i < num_users; ++i) holders += assign(i, k) != 0;
    if (holders > 1) {
      out.push_back({Violation::Kind::kExclusivity, tier, -1, k,
                     std::to_string(holders) + " users share subchannel"});
    }
  }

  for (int i = 0; i < num_users; ++i) {
    int first = -1, last = -1, count = 0;
    for (int k = 0; k < num_ch; ++k) {
      if (assign(i, k) != 0) {
        if (first < 0) first = k;
        last = k;
        ++count;
      }
    }
    if (count > 0 && last - first + 1 != count) {
      out.push_back({Violation::Kind::kAdjacency, tier, i, -1,
                     "assigned set has gaps between " + std::to_string(first) + " and " +
                         std::to_string(last)});
    }
    double total = 0.0;
    for (int k = 0; k < num_ch; ++k) {
      total += power(i, k);
      if (power(i, k) > 0.0 && assign(i, k) == 0) {
        out.push_back({Violation::Kind::kPowerOutsideAssign, tier, i, k,
                       "positive power on unassigned subchannel"});
      }
      if (power(i, k) < 0.0) {
        out.push_back(
            {Violation::Kind::kPowerBudget, tier, i, k, "negative transmit power"});
      }
    }
    const double budget = budgets[static_cast<std::size_t>(i)];
    if (total > budget * (1.0 + kPowerBudgetRelTol) + 1e-18) {
      out.push_back({Violation::Kind::kPowerBudget, tier, i, -1,
                     "total power " + std::to_string(total) + " exceeds budget " +
                         std::to_string(budget)});
    }
  }
}

}  // namespace

std::string to_string(const Violation& v) {
  std::ostringstream os;
  switch (v.kind) {
    case Violation::Kind::kDimension: os << "dimension"; break;
    case Violation::Kind::kExclusivity: os << "exclusivity"; break;
    case Violation::Kind::kAdjacency: os << "adjacency"; break;
    case Violation::Kind::kPowerBudget: os << "power-budget"; break;
    case Violation::Kind::kPowerOutsideAssign: os << "power-outside-assignment"; break;
  }
  os << " [" << v.tier;
  if (v.user >= 0) os << " user " << v.user;
  if (v.subchannel >= 0) os << " subchannel " << v.subchannel;
  os << "] " << v.detail;
  return os.str();
}

std::vector<Violation> validate_allocation(const Allocation& alloc, const NetworkState& state) {
  const int num_ch = state.num_subchannels();
  if (alloc.cue_assign.rows() != state.num_cues() || alloc.cue_assign.cols() != num_ch ||
      alloc.d2d_assign.rows() != state.num_d2d() || alloc.d2d_assign.cols() != num_ch ||
      alloc.cue_power.rows() != alloc.cue_assign.rows() ||
      alloc.cue_power.cols() != alloc.cue_assign.cols() ||
      alloc.d2d_power.rows() != alloc.d2d_assign.rows() ||
      alloc.d2d_power.cols() != alloc.d2d_assign.cols()) {
    throw std::invalid_argument("validate_allocation: allocation dimensions do not match state");
  }

  std::vector<Violation> out;
  std::vector<double> cue_budgets, d2d_budgets;
  cue_budgets.reserve(state.cues.size());
  for (const auto& u : state.cues) cue_budgets.push_back(u.max_power_w);
  d2d_budgets.reserve(state.d2d.size());
  for (const auto& p : state.d2d) d2d_budgets.push_back(p.max_power_w);

  check_tier(alloc.cue_assign, alloc.cue_power, cue_budgets, "cue", out);
  check_tier(alloc.d2d_assign, alloc.d2d_power, d2d_budgets, "d2d", out);
  return out;
}

double pf_tier_utility(const Eigen::ArrayXd& rates, const Eigen::ArrayXd& avg, int window) {
  if (window < 1) throw std::domain_error("pf_utility: window must be >= 1");
  if ((rates < 0.0).any()) throw std::domain_error("pf_utility: negative rate");

  double total = 0.0;
  if (window == 1) {
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
      if (rates(i) == 0.0) return -std::numeric_limits<double>::infinity();
      total += std::log(rates(i));
    }
    return total;
  }

  if (rates.size() != avg.size()) {
    throw std::invalid_argument("pf_utility: rate/average size mismatch");
  }
  const double scale = static_cast<double>(window - 1);
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    if (avg(i) <= 0.0 && rates(i) > 0.0) {
      throw std::domain_error("pf_utility: average rates must be positive for window >= 2");
    }
    if (rates(i) > 0.0) total += std::log1p(rates(i) / (scale * avg(i)));
  }
  return total;
}

double pf_utility(const Eigen::ArrayXd& cue_rates, const Eigen::ArrayXd& d2d_rates,
                  const Eigen::ArrayXd& cue_avg, const Eigen::ArrayXd& d2d_avg, int window) {
  return pf_tier_utility(cue_rates, cue_avg, window) +
         pf_tier_utility(d2d_rates, d2d_avg, window);
}

Eigen::ArrayXd update_avg_rates(const Eigen::ArrayXd& avg, const Eigen::ArrayXd& achieved,
                                int window) {
  if (window < 1) throw std::domain_error("update_avg_rates: window must be >= 1");
  if (avg.size() != achieved.size()) {
    throw std::invalid_argument("update_avg_rates: size mismatch");
  }
  const double inv = 1.0 / static_cast<double>(window);
  return (1.0 - inv) * avg + inv * achieved;
}

}  // namespace pfsim
