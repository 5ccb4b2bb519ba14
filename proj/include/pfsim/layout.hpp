// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pfsim/rng.hpp"

namespace pfsim {

/// Hexagonal cell grid: either the single centre cell or the 19-cell
/// cluster with toroidal wrap-around so edge cells see the full
/// interference geometry.
class Layout {
 public:
  static Layout single_cell(double inter_site_distance_m);
  static Layout nineteen_cell(double inter_site_distance_m);

  int num_cells() const { return static_cast<int>(centers_.size()); }
  const Eigen::Vector2d& center(int cell) const { return centers_[static_cast<std::size_t>(cell)]; }
  double inter_site_distance() const { return isd_; }
  bool wrap_around() const { return !wrap_offsets_.empty(); }

  /// Shortest distance between two points, taking the minimum over the
  /// cluster's translation images in wrap-around mode.
  double distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;

  /// True when the point lies inside the given cell's hexagon.
  bool in_cell(const Eigen::Vector2d& point, int cell) const;

  /// Uniform sample inside the cell's hexagon.
  Eigen::Vector2d random_point_in_cell(int cell, Rng& rng) const;

  /// Hexagon circumradius (centre to vertex).
  double hex_radius() const { return isd_ / std::sqrt(3.0); }

 private:
  double isd_ = 0.0;
  std::vector<Eigen::Vector2d> centers_;
  std::vector<Eigen::Vector2d> wrap_offsets_;  // non-zero cluster translations
};

}  // namespace pfsim
