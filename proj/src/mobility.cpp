// SPDX-License-Identifier: Apache-2.0
#include "pfsim/mobility.hpp"

#include <cmath>
#include <stdexcept>

namespace pfsim {
namespace {

void redraw(MobilityState& s, Rng& rng) {
  s.speed_mps = rng.uniform(0.0, MobilityState::kMaxSpeed);
  s.direction_rad = rng.uniform(0.0, 2.0 * M_PI);
  s.flight_timer_s = rng.uniform(MobilityState::kMinFlight, MobilityState::kMaxFlight);
}

}  // namespace

MobilityState MobilityState::spawn(const Eigen::Vector2d& position, int home_cell, Rng& rng) {
  MobilityState s;
  s.position = position;
  s.home_cell = home_cell;
  redraw(s, rng);
  return s;
}

MobilityState step_mobility(const MobilityState& state, double dt_s, const Layout& layout,
                            Rng& rng) {
  if (dt_s <= 0.0) throw std::domain_error("step_mobility: dt must be positive");

  MobilityState next = state;
  const Eigen::Vector2d step(std::cos(state.direction_rad) * state.speed_mps * dt_s,
                             std::sin(state.direction_rad) * state.speed_mps * dt_s);
  const Eigen::Vector2d candidate = state.position + step;

  if (layout.in_cell(candidate, state.home_cell)) {
    next.position = candidate;
    next.flight_timer_s -= dt_s;
    if (next.flight_timer_s <= 0.0) redraw(next, rng);
  } else {
    // Border hit: stay put this step and pick a fresh heading.
    redraw(next, rng);
  }
  return next;
}

}  // namespace pfsim
