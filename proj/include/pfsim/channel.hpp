// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pfsim/rng.hpp"

namespace pfsim {

enum class FadingMode { kFlat, kRayleigh };

/// Log-distance path loss PL(d) = intercept + slope * log10(d / 1 km) in dB.
struct PathLossModel {
  double intercept_db = 0.0;
  double slope_db_per_decade = 0.0;

  double loss_db(double distance_m) const;
};

/// Link-level parameters. The defaults follow common macro-cell practice;
/// every constant can be overridden from the scenario config.
struct ChannelParams {
  double carrier_freq_hz = 2.0e9;
  PathLossModel pathloss_cellular{128.1, 37.6};  // UE <-> eNB
  PathLossModel pathloss_d2d{148.0, 40.0};       // UE <-> UE, short range
  double shadowing_stddev_cell_db = 8.0;
  double shadowing_stddev_d2d_db = 6.0;
  double decorrelation_length_m = 50.0;
  FadingMode fading = FadingMode::kRayleigh;
  double enb_antenna_gain_db = 15.0;
  double ue_antenna_gain_db = 4.0;
  double noise_figure_db = 5.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 180e3;

  /// Effective noise density at the receiver (noise figure applied), W/Hz.
  double noise_density_w_hz() const;
};

/// Zero-mean unit-variance Gaussian field over the plane whose
/// autocorrelation decays as exp(-d / decorrelation_length). Built from a
/// fixed set of random plane waves, so queries are order-independent and
/// deterministic for a given seed. Scale by the per-link-type shadowing
/// standard deviation at the point of use.
class ShadowingField {
 public:
  ShadowingField() = default;
  ShadowingField(std::uint64_t seed, double decorrelation_length_m, int num_components = 128);

  double value(const Eigen::Vector2d& position) const;

 private:
  Eigen::ArrayXd wave_x_, wave_y_, phase_;
  double scale_ = 0.0;
};

/// Modulation-and-coding lookup: spectral efficiency of the highest entry
/// whose SINR threshold is not above the operating SINR.
class McsTable {
 public:
  struct Entry {
    double sinr_threshold_db;
    double efficiency_bps_hz;
  };

  McsTable() = default;
  explicit McsTable(std::vector<Entry> entries);

  double efficiency(double sinr_db) const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// 15-entry CQI-style default table.
  static McsTable default_table();
  /// Plain-text "threshold_db efficiency" pairs, '#' comments.
  static McsTable load(const std::string& path);

 private:
  std::vector<Entry> entries_;
};

/// Composite linear link gain: path loss at the (possibly wrap-around)
/// distance, shadowing sampled at the transmitter, antenna gain at the
/// receiver and the small-scale fading factor for this subchannel.
double link_gain(double distance_m, bool cellular_link, bool rx_is_enb,
                 const ChannelParams& params, double shadow_db, double fading_linear);

/// Per-subchannel small-scale fading factors for one link and TTI. Flat
/// mode returns all ones; Rayleigh mode draws i.i.d. unit-mean exponential
/// power gains from the derived stream.
Eigen::ArrayXd fading_factors(FadingMode mode, int num_subchannels, std::uint64_t seed,
                              std::uint64_t tti, std::uint64_t link_tag);

/// Shannon rate over one subchannel: B log2(1 + p g / (N0 B + I)).
double instantaneous_rate(double power_w, double gain, double interference_w,
                          double bandwidth_hz, double noise_density_w_hz);

double sinr_to_efficiency(double sinr_db, const McsTable& table);

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace pfsim
