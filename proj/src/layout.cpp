// SPDX-License-Identifier: Apache-2.0
#include "pfsim/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pfsim {
namespace {

// Hex lattice basis with neighbouring centres one inter-site distance apart.
Eigen::Vector2d lattice(double isd, int i, int j) {
  return isd * Eigen::Vector2d(static_cast<double>(i) + 0.5 * static_cast<double>(j),
                               std::sqrt(3.0) / 2.0 * static_cast<double>(j));
}

}  // namespace

Layout Layout::single_cell(double inter_site_distance_m) {
  if (inter_site_distance_m <= 0.0) {
    throw std::invalid_argument("Layout: inter-site distance must be positive");
  }
  Layout layout;
  layout.isd_ = inter_site_distance_m;
  layout.centers_.push_back(Eigen::Vector2d::Zero());
  return layout;
}

Layout Layout::nineteen_cell(double inter_site_distance_m) {
  if (inter_site_distance_m <= 0.0) {
    throw std::invalid_argument("Layout: inter-site distance must be positive");
  }
  Layout layout;
  layout.isd_ = inter_site_distance_m;
  // Centre cell plus the two surrounding rings: all axial coordinates with
  // hex norm max(|i|, |j|, |i+j|) <= 2. Ordered centre-out so cell 0 is the
  // middle of the grid.
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      if (std::max({std::abs(i), std::abs(j), std::abs(i + j)}) <= 2) {
        layout.centers_.push_back(lattice(inter_site_distance_m, i, j));
      }
    }
  }
  std::sort(layout.centers_.begin(), layout.centers_.end(),
            [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
              if (std::abs(a.norm() - b.norm()) > 1e-9) return a.norm() < b.norm();
              return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
            });
  // The 19-cell cluster tiles the plane under translations of length
  // isd*sqrt(19); the six rotations of (i, j) = (3, 2) generate them.
  const Eigen::Vector2d t0 = lattice(inter_site_distance_m, 3, 2);
  for (int r = 0; r < 6; ++r) {
    const double angle = M_PI / 3.0 * static_cast<double>(r);
    const Eigen::Rotation2Dd rot(angle);
    layout.wrap_offsets_.push_back(rot * t0);
  }
  return layout;
}

double Layout::distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  double best = (a - b).norm();
  for (const auto& offset : wrap_offsets_) {
    best = std::min(best, (a - (b + offset)).norm());
  }
  return best;
}

bool Layout::in_cell(const Eigen::Vector2d& point, int cell) const {
  const Eigen::Vector2d d = point - center(cell);
  const double apothem = isd_ / 2.0;
  // Flat edges face the six neighbouring centres (at 0, 60, ... degrees).
  for (int r = 0; r < 6; ++r) {
    const double angle = M_PI / 3.0 * static_cast<double>(r);
    if (d.x() * std::cos(angle) + d.y() * std::sin(angle) > apothem + 1e-9) return false;
  }
  return true;
}

Eigen::Vector2d Layout::random_point_in_cell(int cell, Rng& rng) const {
  const double r = hex_radius();
  for (;;) {
    const Eigen::Vector2d candidate =
        center(cell) + Eigen::Vector2d(rng.uniform(-r, r), rng.uniform(-r, r));
    if (in_cell(candidate, cell)) return candidate;
  }
}

}  // namespace pfsim
