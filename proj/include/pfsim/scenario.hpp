// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pfsim/channel.hpp"
#include "pfsim/layout.hpp"
#include "pfsim/mobility.hpp"
#include "pfsim/scheduler.hpp"
#include "pfsim/types.hpp"

namespace pfsim {

/// Fully-resolved description of one simulation run.
struct ScenarioConfig {
  int num_subchannels = 5;  // K
  int num_cues = 3;         // per cell
  int num_d2d = 2;          // per cell
  int window = 50;          // PF averaging window T
  int max_passes = 1;       // allocate/adjust sweeps M
  std::uint64_t seed = 1;
  int ttis = 100;
  double tti_duration_s = 1e-3;
  int cells = 1;  // 1 or 19
  std::string scheduler = "heuristic";  // "heuristic" | "optimal"
  double tier_rate_budget_cue_bps = std::numeric_limits<double>::infinity();
  double tier_rate_budget_d2d_bps = std::numeric_limits<double>::infinity();
  double d2d_min_distance_m = 3.0;
  double d2d_max_distance_m = 50.0;
  double ue_max_power_dbm = 23.0;
  double avg_rate_init_bps = 1000.0;
  double inter_site_distance_m = 500.0;
  bool mobility = true;
  bool validate_each_tti = true;
  bool instrument = true;
  double enumeration_limit = 1e7;
  std::string fading = "auto";        // auto | flat | rayleigh
  std::string mcs_table = "default";  // default | shannon | <path>
  ChannelParams channel;

  FadingMode resolved_fading() const;
  SchedulerConfig scheduler_config() const;
  void validate() const;
};

/// Per-run metric collection. User columns are global indices
/// cell * per_cell_count + local index.
struct MetricSeries {
  Eigen::ArrayXXd cue_rates_bps;  // (ttis, cues) reported rates
  Eigen::ArrayXXd d2d_rates_bps;
  Eigen::ArrayXXd cue_avg_bps;  // running averages after each TTI
  Eigen::ArrayXXd d2d_avg_bps;
  Eigen::ArrayXd logsum_cue_per_tti;  // sum of ln(avg) over the tier
  Eigen::ArrayXd logsum_d2d_per_tti;
  double utility_last = 0.0;  // summed over cells, final TTI
  int iterations_last = 0;
  long wf_calls_cue = 0;
  long wf_calls_d2d = 0;
  long patterns_enumerated = 0;
  long violations = 0;

  double final_logsum_cue() const {
    return logsum_cue_per_tti.size() ? logsum_cue_per_tti(logsum_cue_per_tti.size() - 1) : 0.0;
  }
  double final_logsum_d2d() const {
    return logsum_d2d_per_tti.size() ? logsum_d2d_per_tti(logsum_d2d_per_tti.size() - 1) : 0.0;
  }
  /// Tier throughput: per-TTI tier rate sum, averaged over the run.
  double mean_tier_throughput_cue() const {
    return cue_rates_bps.size() ? cue_rates_bps.sum() / cue_rates_bps.rows() : 0.0;
  }
  double mean_tier_throughput_d2d() const {
    return d2d_rates_bps.size() ? d2d_rates_bps.sum() / d2d_rates_bps.rows() : 0.0;
  }
};

/// One cell's dropped population with its mobility state.
struct CellPopulation {
  std::vector<MobilityState> cues;
  std::vector<MobilityState> d2d_tx;
  std::vector<MobilityState> d2d_rx;
};

/// Uniform user drop: CUEs and D2D transmitters uniform per cell, each D2D
/// receiver uniform in the [min, max] annulus around its transmitter
/// (rejected until inside the cell).
std::vector<CellPopulation> drop_users(const ScenarioConfig& config, const Layout& layout,
                                       Rng& rng);

/// Builds the gain tensor for one cell at one instant.
GainTensor build_cell_gains(const std::vector<CueUser>& cues, const std::vector<D2dPair>& d2d,
                            int num_subchannels, const Layout& layout, int cell,
                            const ChannelParams& params, const ShadowingField& shadow,
                            FadingMode fading, std::uint64_t seed, std::uint64_t tti);

/// Single-cell scheduling instant with random user positions and random
/// positive average rates; the common ground for scheduler comparisons.
NetworkState random_instant_state(const ScenarioConfig& config, std::uint64_t seed);

/// Full TTI loop: move users, rebuild gains, schedule, quantise rates
/// through the MCS table, update averages and collect metrics.
MetricSeries run_scenario(const ScenarioConfig& config);

}  // namespace pfsim
