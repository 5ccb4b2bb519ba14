// SPDX-License-Identifier: Apache-2.0
#include "pfsim/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "pfsim/metrics.hpp"

namespace pfsim {
namespace {

// Stream tags for deriving independent random streams from the master seed.
enum : std::uint64_t { kDropStream = 1, kMobilityStream = 2, kShadowStream = 3, kAvgStream = 5 };

// Link kinds for fading stream derivation.
enum : int { kLinkCueEnb = 0, kLinkD2dTxEnb = 1, kLinkD2dPair = 2, kLinkCueD2dRx = 3 };

std::uint64_t link_tag(int cell, int kind, int a, int b) {
  return ((static_cast<std::uint64_t>(cell) * 8 + static_cast<std::uint64_t>(kind)) << 26) |
         (static_cast<std::uint64_t>(a) << 13) | static_cast<std::uint64_t>(b);
}

double shadow_db(const ShadowingField& field, const Eigen::Vector2d& tx_pos, bool cellular_link,
                 const ChannelParams& params) {
  const double stddev =
      cellular_link ? params.shadowing_stddev_cell_db : params.shadowing_stddev_d2d_db;
  return stddev * field.value(tx_pos);
}

/// Gain of a cross-cell interference link (no fast fading applied). The
/// transmitter's unit shadow value is precomputed once per TTI.
double cross_gain(const Eigen::Vector2d& tx_pos, double tx_unit_shadow,
                  const Eigen::Vector2d& rx_pos, bool rx_is_enb, const Layout& layout,
                  const ChannelParams& params) {
  const double distance = layout.distance(tx_pos, rx_pos);
  const bool cellular = rx_is_enb;
  const double stddev =
      cellular ? params.shadowing_stddev_cell_db : params.shadowing_stddev_d2d_db;
  return link_gain(distance, cellular, rx_is_enb, params, stddev * tx_unit_shadow, 1.0);
}

std::vector<CueUser> snapshot_cues(const CellPopulation& pop, double max_power_w,
                                   const Eigen::ArrayXd& avg) {
  std::vector<CueUser> cues;
  cues.reserve(pop.cues.size());
  for (std::size_t i = 0; i < pop.cues.size(); ++i) {
    cues.push_back({static_cast<int>(i), pop.cues[i].position, max_power_w,
                    avg(static_cast<Eigen::Index>(i))});
  }
  return cues;
}

std::vector<D2dPair> snapshot_d2d(const CellPopulation& pop, double max_power_w,
                                  const Eigen::ArrayXd& avg) {
  std::vector<D2dPair> pairs;
  pairs.reserve(pop.d2d_tx.size());
  for (std::size_t j = 0; j < pop.d2d_tx.size(); ++j) {
    pairs.push_back({static_cast<int>(j), pop.d2d_tx[j].position, pop.d2d_rx[j].position,
                     max_power_w, avg(static_cast<Eigen::Index>(j))});
  }
  return pairs;
}

}  // namespace

FadingMode ScenarioConfig::resolved_fading() const {
  if (fading == "flat") return FadingMode::kFlat;
  if (fading == "rayleigh") return FadingMode::kRayleigh;
  if (fading == "auto") {
    return num_subchannels >= 25 ? FadingMode::kFlat : FadingMode::kRayleigh;
  }
  throw std::invalid_argument("ScenarioConfig: unknown fading mode '" + fading + "'");
}

SchedulerConfig ScenarioConfig::scheduler_config() const {
  SchedulerConfig sc;
  sc.window = window;
  sc.max_passes = max_passes;
  sc.tier_rate_budget_cue_bps = tier_rate_budget_cue_bps;
  sc.tier_rate_budget_d2d_bps = tier_rate_budget_d2d_bps;
  sc.instrument = instrument;
  sc.enumeration_limit = enumeration_limit;
  return sc;
}

void ScenarioConfig::validate() const {
  if (num_subchannels < 1) throw std::invalid_argument("config: subchannels must be >= 1");
  if (num_cues < 0 || num_d2d < 0) throw std::invalid_argument("config: negative user count");
  if (num_cues + num_d2d < 1) throw std::invalid_argument("config: need at least one user");
  if (window < 1) throw std::invalid_argument("config: window must be >= 1");
  if (max_passes < 1) throw std::invalid_argument("config: passes must be >= 1");
  if (ttis < 1) throw std::invalid_argument("config: ttis must be >= 1");
  if (tti_duration_s <= 0.0) throw std::invalid_argument("config: tti duration must be positive");
  if (cells != 1 && cells != 19) throw std::invalid_argument("config: cells must be 1 or 19");
  if (scheduler != "heuristic" && scheduler != "optimal") {
    throw std::invalid_argument("config: scheduler must be 'heuristic' or 'optimal'");
  }
  if (d2d_min_distance_m <= 0.0 || d2d_max_distance_m < d2d_min_distance_m) {
    throw std::invalid_argument("config: bad D2D pairing distance range");
  }
  if (avg_rate_init_bps <= 0.0) {
    throw std::invalid_argument("config: avg_rate_init must be positive");
  }
  resolved_fading();
}

std::vector<CellPopulation> drop_users(const ScenarioConfig& config, const Layout& layout,
                                       Rng& rng) {
  // Every entity draws from its own (base, cell, tier, index) stream, so
  // adding users to one tier leaves everyone else's geometry untouched
  // (common random numbers across sweep points).
  const std::uint64_t base = rng.next_u64();
  std::vector<CellPopulation> cells(static_cast<std::size_t>(layout.num_cells()));
  for (int c = 0; c < layout.num_cells(); ++c) {
    CellPopulation& pop = cells[static_cast<std::size_t>(c)];
    for (int i = 0; i < config.num_cues; ++i) {
      Rng user_rng = Rng::derive(base, c, 0, i);
      pop.cues.push_back(
          MobilityState::spawn(layout.random_point_in_cell(c, user_rng), c, user_rng));
    }
    for (int j = 0; j < config.num_d2d; ++j) {
      Rng pair_rng = Rng::derive(base, c, 1, j);
      const Eigen::Vector2d tx = layout.random_point_in_cell(c, pair_rng);
      Eigen::Vector2d rx;
      for (;;) {
        const double r2min = config.d2d_min_distance_m * config.d2d_min_distance_m;
        const double r2max = config.d2d_max_distance_m * config.d2d_max_distance_m;
        const double radius = std::sqrt(pair_rng.uniform(r2min, r2max));
        const double theta = pair_rng.uniform(0.0, 2.0 * M_PI);
        rx = tx + radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
        if (layout.in_cell(rx, c)) break;
      }
      pop.d2d_tx.push_back(MobilityState::spawn(tx, c, pair_rng));
      pop.d2d_rx.push_back(MobilityState::spawn(rx, c, pair_rng));
    }
  }
  return cells;
}

GainTensor build_cell_gains(const std::vector<CueUser>& cues, const std::vector<D2dPair>& d2d,
                            int num_subchannels, const Layout& layout, int cell,
                            const ChannelParams& params, const ShadowingField& shadow,
                            FadingMode fading, std::uint64_t seed, std::uint64_t tti) {
  NetworkState shape;  // endpoint numbering helper
  shape.cues = cues;
  shape.d2d = d2d;

  GainTensor gains(shape.num_endpoints(), num_subchannels, params.noise_density_w_hz(),
                   params.bandwidth_hz);
  const Eigen::Vector2d enb = layout.center(cell);
  const int num_cues = static_cast<int>(cues.size());
  const int num_d2d = static_cast<int>(d2d.size());

  auto fill = [&](int tx_ep, int rx_ep, const Eigen::Vector2d& tx_pos,
                  const Eigen::Vector2d& rx_pos, bool cellular, bool rx_is_enb,
                  std::uint64_t tag) {
    const double distance = layout.distance(tx_pos, rx_pos);
    const double shadow_value = shadow_db(shadow, tx_pos, cellular, params);
    const Eigen::ArrayXd fade = fading_factors(fading, num_subchannels, seed, tti, tag);
    for (int k = 0; k < num_subchannels; ++k) {
      gains.set(tx_ep, rx_ep, k,
                link_gain(distance, cellular, rx_is_enb, params, shadow_value, fade(k)));
    }
  };

  for (int i = 0; i < num_cues; ++i) {
    fill(shape.cue_endpoint(i), NetworkState::kEnbEndpoint, cues[static_cast<std::size_t>(i)].position,
         enb, true, true, link_tag(cell, kLinkCueEnb, i, 0));
  }
  for (int j = 0; j < num_d2d; ++j) {
    const auto& pair = d2d[static_cast<std::size_t>(j)];
    fill(shape.d2d_tx_endpoint(j), NetworkState::kEnbEndpoint, pair.tx_position, enb, true, true,
         link_tag(cell, kLinkD2dTxEnb, j, 0));
    fill(shape.d2d_tx_endpoint(j), shape.d2d_rx_endpoint(j), pair.tx_position, pair.rx_position,
         false, false, link_tag(cell, kLinkD2dPair, j, 0));
    for (int i = 0; i < num_cues; ++i) {
      fill(shape.cue_endpoint(i), shape.d2d_rx_endpoint(j),
           cues[static_cast<std::size_t>(i)].position, pair.rx_position, false, false,
           link_tag(cell, kLinkCueD2dRx, i, j));
    }
  }
  return gains;
}

NetworkState random_instant_state(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  const Layout layout = Layout::single_cell(config.inter_site_distance_m);
  Rng drop_rng = Rng::derive(seed, kDropStream);
  const std::vector<CellPopulation> cells = drop_users(config, layout, drop_rng);
  const CellPopulation& pop = cells.front();

  // Average rates drawn log-uniformly around the rates such links actually
  // achieve, as they would sit after a few PF windows.
  Rng avg_rng = Rng::derive(seed, kAvgStream);
  const double max_power_w = dbm_to_watts(config.ue_max_power_dbm);
  auto draw_avg = [&avg_rng] {
    return std::exp(avg_rng.uniform(std::log(1e6), std::log(3e7)));
  };
  Eigen::ArrayXd cue_avg(config.num_cues), d2d_avg(config.num_d2d);
  for (int i = 0; i < config.num_cues; ++i) cue_avg(i) = draw_avg();
  for (int j = 0; j < config.num_d2d; ++j) d2d_avg(j) = draw_avg();

  NetworkState state;
  state.cues = snapshot_cues(pop, max_power_w, cue_avg);
  state.d2d = snapshot_d2d(pop, max_power_w, d2d_avg);
  const ShadowingField shadow(Rng::derive(seed, kShadowStream).next_u64(),
                              config.channel.decorrelation_length_m);
  state.gains = build_cell_gains(state.cues, state.d2d, config.num_subchannels, layout, 0,
                                 config.channel, shadow, config.resolved_fading(), seed, 0);
  return state;
}

MetricSeries run_scenario(const ScenarioConfig& config) {
  config.validate();
  const Layout layout = config.cells == 19 ? Layout::nineteen_cell(config.inter_site_distance_m)
                                           : Layout::single_cell(config.inter_site_distance_m);
  const int num_cells = layout.num_cells();
  const FadingMode fading = config.resolved_fading();
  const double max_power_w = dbm_to_watts(config.ue_max_power_dbm);
  const SchedulerConfig sched_config = config.scheduler_config();

  McsTable mcs;
  const bool use_mcs = config.mcs_table != "shannon";
  if (config.mcs_table == "default") {
    mcs = McsTable::default_table();
  } else if (use_mcs) {
    mcs = McsTable::load(config.mcs_table);
  }

  if (config.scheduler == "optimal") {
    const double joint =
        count_joint_patterns(config.num_cues, config.num_d2d, config.num_subchannels);
    if (joint > config.enumeration_limit) throw EnumerationLimitExceeded(joint);
  }

  Rng drop_rng = Rng::derive(config.seed, kDropStream);
  std::vector<CellPopulation> cells = drop_users(config, layout, drop_rng);
  const ShadowingField shadow(Rng::derive(config.seed, kShadowStream).next_u64(),
                              config.channel.decorrelation_length_m);

  const int total_cues = num_cells * config.num_cues;
  const int total_d2d = num_cells * config.num_d2d;
  std::vector<Eigen::ArrayXd> cue_avg(static_cast<std::size_t>(num_cells)),
      d2d_avg(static_cast<std::size_t>(num_cells));
  for (int c = 0; c < num_cells; ++c) {
    cue_avg[static_cast<std::size_t>(c)] =
        Eigen::ArrayXd::Constant(config.num_cues, config.avg_rate_init_bps);
    d2d_avg[static_cast<std::size_t>(c)] =
        Eigen::ArrayXd::Constant(config.num_d2d, config.avg_rate_init_bps);
  }

  MetricSeries series;
  series.cue_rates_bps = Eigen::ArrayXXd::Zero(config.ttis, total_cues);
  series.d2d_rates_bps = Eigen::ArrayXXd::Zero(config.ttis, total_d2d);
  series.cue_avg_bps = Eigen::ArrayXXd::Zero(config.ttis, total_cues);
  series.d2d_avg_bps = Eigen::ArrayXXd::Zero(config.ttis, total_d2d);
  series.logsum_cue_per_tti = Eigen::ArrayXd::Zero(config.ttis);
  series.logsum_d2d_per_tti = Eigen::ArrayXd::Zero(config.ttis);

  // Previous-TTI transmit powers per cell, the source of inter-cell
  // interference (one-TTI lag breaks the circular dependence).
  std::vector<Eigen::ArrayXXd> prev_cue_power(static_cast<std::size_t>(num_cells)),
      prev_d2d_power(static_cast<std::size_t>(num_cells));
  for (int c = 0; c < num_cells; ++c) {
    prev_cue_power[static_cast<std::size_t>(c)] =
        Eigen::ArrayXXd::Zero(config.num_cues, config.num_subchannels);
    prev_d2d_power[static_cast<std::size_t>(c)] =
        Eigen::ArrayXXd::Zero(config.num_d2d, config.num_subchannels);
  }

  for (int tti = 0; tti < config.ttis; ++tti) {
    if (config.mobility && tti > 0) {
      for (int c = 0; c < num_cells; ++c) {
        CellPopulation& pop = cells[static_cast<std::size_t>(c)];
        auto step_all = [&](std::vector<MobilityState>& walkers, int tier) {
          for (std::size_t w = 0; w < walkers.size(); ++w) {
            Rng walker_rng = Rng::derive(config.seed, kMobilityStream,
                                         static_cast<std::uint64_t>(tti), c, tier,
                                         static_cast<int>(w));
            walkers[w] = step_mobility(walkers[w], config.tti_duration_s, layout, walker_rng);
          }
        };
        step_all(pop.cues, 0);
        step_all(pop.d2d_tx, 1);
        step_all(pop.d2d_rx, 2);
      }
    }

    double utility_total = 0.0;
    int iterations = 0;

    std::vector<Eigen::ArrayXXd> new_cue_power = prev_cue_power, new_d2d_power = prev_d2d_power;

    // Unit shadow values at every transmitter, shared by all cross-cell
    // interference links this TTI.
    std::vector<std::vector<double>> cue_shadow(static_cast<std::size_t>(num_cells)),
        d2d_tx_shadow(static_cast<std::size_t>(num_cells));
    if (num_cells > 1) {
      for (int c = 0; c < num_cells; ++c) {
        for (const auto& walker : cells[static_cast<std::size_t>(c)].cues) {
          cue_shadow[static_cast<std::size_t>(c)].push_back(shadow.value(walker.position));
        }
        for (const auto& walker : cells[static_cast<std::size_t>(c)].d2d_tx) {
          d2d_tx_shadow[static_cast<std::size_t>(c)].push_back(shadow.value(walker.position));
        }
      }
    }

    for (int c = 0; c < num_cells; ++c) {
      const CellPopulation& pop = cells[static_cast<std::size_t>(c)];
      NetworkState state;
      state.cues = snapshot_cues(pop, max_power_w, cue_avg[static_cast<std::size_t>(c)]);
      state.d2d = snapshot_d2d(pop, max_power_w, d2d_avg[static_cast<std::size_t>(c)]);
      state.gains = build_cell_gains(state.cues, state.d2d, config.num_subchannels, layout, c,
                                     config.channel, shadow, fading, config.seed,
                                     static_cast<std::uint64_t>(tti));

      // Inter-cell interference from every other cell's previous-TTI powers.
      if (num_cells > 1) {
        state.ext_interference_enb = Eigen::ArrayXd::Zero(config.num_subchannels);
        state.ext_interference_d2drx =
            Eigen::ArrayXXd::Zero(config.num_d2d, config.num_subchannels);
        const Eigen::Vector2d enb = layout.center(c);
        for (int o = 0; o < num_cells; ++o) {
          if (o == c) continue;
          const CellPopulation& other = cells[static_cast<std::size_t>(o)];
          auto add_interferer = [&](const Eigen::Vector2d& tx, double tx_shadow,
                                    const Eigen::ArrayXXd& powers, int row) {
            bool active = false;
            for (int k = 0; k < config.num_subchannels; ++k) {
              if (powers(row, k) > 0.0) active = true;
            }
            if (!active) return;
            const double g_enb =
                cross_gain(tx, tx_shadow, enb, true, layout, config.channel);
            for (int k = 0; k < config.num_subchannels; ++k) {
              const double p = powers(row, k);
              if (p > 0.0) state.ext_interference_enb(k) += p * g_enb;
            }
            for (int j = 0; j < config.num_d2d; ++j) {
              const double g_rx =
                  cross_gain(tx, tx_shadow, pop.d2d_rx[static_cast<std::size_t>(j)].position,
                             false, layout, config.channel);
              for (int k = 0; k < config.num_subchannels; ++k) {
                const double p = powers(row, k);
                if (p > 0.0) state.ext_interference_d2drx(j, k) += p * g_rx;
              }
            }
          };
          for (int i = 0; i < config.num_cues; ++i) {
            add_interferer(other.cues[static_cast<std::size_t>(i)].position,
                           cue_shadow[static_cast<std::size_t>(o)][static_cast<std::size_t>(i)],
                           prev_cue_power[static_cast<std::size_t>(o)], i);
          }
          for (int jo = 0; jo < config.num_d2d; ++jo) {
            add_interferer(other.d2d_tx[static_cast<std::size_t>(jo)].position,
                           d2d_tx_shadow[static_cast<std::size_t>(o)][static_cast<std::size_t>(jo)],
                           prev_d2d_power[static_cast<std::size_t>(o)], jo);
          }
        }
      }

      const ScheduleOutcome outcome = config.scheduler == "optimal"
                                          ? optimal_pf_schedule(state, sched_config)
                                          : heuristic_pf_schedule(state, sched_config);

      if (config.validate_each_tti) {
        series.violations += static_cast<long>(validate_allocation(outcome.allocation, state).size());
      }
      if (outcome.ops) {
        for (const auto& pass : outcome.ops->passes) {
          series.wf_calls_cue += pass.cue_wf_calls;
          series.wf_calls_d2d += pass.d2d_wf_calls;
        }
        series.patterns_enumerated += outcome.ops->patterns_enumerated;
      }

      // Realised rates: the scheduler's adjusted targets, capped by what the
      // quantised MCS efficiency can actually carry on the assigned block.
      Eigen::ArrayXd cue_reported = outcome.cue_rates.rates_bps;
      Eigen::ArrayXd d2d_reported = outcome.d2d_rates.rates_bps;
      if (use_mcs) {
        const double noise_w = state.gains.noise_power_w();
        for (int i = 0; i < config.num_cues; ++i) {
          double quantised = 0.0;
          for (int k = 0; k < config.num_subchannels; ++k) {
            const double p = outcome.allocation.cue_power(i, k);
            if (p <= 0.0) continue;
            double interference = state.ext_at_enb(k);
            for (int j = 0; j < config.num_d2d; ++j) {
              const double pd = outcome.allocation.d2d_power(j, k);
              if (pd > 0.0) {
                interference +=
                    pd * state.gains(state.d2d_tx_endpoint(j), NetworkState::kEnbEndpoint, k);
              }
            }
            const double sinr = p * state.gains(state.cue_endpoint(i), NetworkState::kEnbEndpoint, k) /
                                (noise_w + interference);
            quantised +=
                config.channel.bandwidth_hz * sinr_to_efficiency(linear_to_db(sinr), mcs);
          }
          cue_reported(i) = std::min(cue_reported(i), quantised);
        }
        for (int j = 0; j < config.num_d2d; ++j) {
          double quantised = 0.0;
          for (int k = 0; k < config.num_subchannels; ++k) {
            const double p = outcome.allocation.d2d_power(j, k);
            if (p <= 0.0) continue;
            double interference = state.ext_at_d2drx(j, k);
            for (int i = 0; i < config.num_cues; ++i) {
              const double pc = outcome.allocation.cue_power(i, k);
              if (pc > 0.0) {
                interference += pc * state.gains(state.cue_endpoint(i), state.d2d_rx_endpoint(j), k);
              }
            }
            const double sinr = p * state.gains(state.d2d_tx_endpoint(j), state.d2d_rx_endpoint(j), k) /
                                (noise_w + interference);
            quantised +=
                config.channel.bandwidth_hz * sinr_to_efficiency(linear_to_db(sinr), mcs);
          }
          d2d_reported(j) = std::min(d2d_reported(j), quantised);
        }
      }

      cue_avg[static_cast<std::size_t>(c)] =
          update_avg_rates(cue_avg[static_cast<std::size_t>(c)], cue_reported, config.window);
      d2d_avg[static_cast<std::size_t>(c)] =
          update_avg_rates(d2d_avg[static_cast<std::size_t>(c)], d2d_reported, config.window);

      for (int i = 0; i < config.num_cues; ++i) {
        series.cue_rates_bps(tti, c * config.num_cues + i) = cue_reported(i);
        series.cue_avg_bps(tti, c * config.num_cues + i) =
            cue_avg[static_cast<std::size_t>(c)](i);
      }
      for (int j = 0; j < config.num_d2d; ++j) {
        series.d2d_rates_bps(tti, c * config.num_d2d + j) = d2d_reported(j);
        series.d2d_avg_bps(tti, c * config.num_d2d + j) =
            d2d_avg[static_cast<std::size_t>(c)](j);
      }

      new_cue_power[static_cast<std::size_t>(c)] = outcome.allocation.cue_power;
      new_d2d_power[static_cast<std::size_t>(c)] = outcome.allocation.d2d_power;
      utility_total += outcome.utility;
      iterations = std::max(iterations, outcome.iterations_used);
    }

    prev_cue_power = std::move(new_cue_power);
    prev_d2d_power = std::move(new_d2d_power);

    double logsum_c = 0.0, logsum_d = 0.0;
    for (int c = 0; c < num_cells; ++c) {
      logsum_c += cue_avg[static_cast<std::size_t>(c)].log().sum();
      logsum_d += d2d_avg[static_cast<std::size_t>(c)].log().sum();
    }
    series.logsum_cue_per_tti(tti) = logsum_c;
    series.logsum_d2d_per_tti(tti) = logsum_d;
    series.utility_last = utility_total;
    series.iterations_last = iterations;
  }
  return series;
}

}  // namespace pfsim
