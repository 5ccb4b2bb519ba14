// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "pfsim/layout.hpp"
#include "pfsim/rng.hpp"

namespace pfsim {

/// Random-walk state for one UE: speed uniform on [0, 10] m/s, direction
/// uniform on [0, 2pi), flight time uniform on [10, 30] s; everything is
/// redrawn when the flight timer expires or the walker would leave its
/// home cell.
struct MobilityState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double speed_mps = 0.0;
  double direction_rad = 0.0;
  double flight_timer_s = 0.0;
  int home_cell = 0;

  static constexpr double kMaxSpeed = 10.0;
  static constexpr double kMinFlight = 10.0;
  static constexpr double kMaxFlight = 30.0;

  static MobilityState spawn(const Eigen::Vector2d& position, int home_cell, Rng& rng);
};

/// Advances one walker by dt seconds.
MobilityState step_mobility(const MobilityState& state, double dt_s, const Layout& layout,
                            Rng& rng);

}  // namespace pfsim
