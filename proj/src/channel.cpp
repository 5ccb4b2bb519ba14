// SPDX-License-Identifier: Apache-2.0
#include "pfsim/channel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pfsim {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double PathLossModel::loss_db(double distance_m) const {
  const double d = std::max(distance_m, 1.0);  // clamp below 1 m
  return intercept_db + slope_db_per_decade * std::log10(d / 1000.0);
}

double ChannelParams::noise_density_w_hz() const {
  return dbm_to_watts(noise_density_dbm_hz + noise_figure_db);
}

ShadowingField::ShadowingField(std::uint64_t seed, double decorrelation_length_m,
                               int num_components) {
  if (decorrelation_length_m <= 0.0) {
    throw std::invalid_argument("ShadowingField: decorrelation length must be positive");
  }
  if (num_components < 1) {
    throw std::invalid_argument("ShadowingField: need at least one component");
  }
  Rng rng = Rng::derive(seed, 0x5ad0ULL);
  wave_x_.resize(num_components);
  wave_y_.resize(num_components);
  phase_.resize(num_components);
  for (int m = 0; m < num_components; ++m) {
    // Radial wavenumber from the spectral density of the exponential
    // correlation in 2-D: CDF(k) = 1 - (1 + (k L)^2)^{-1/2}.
    double u = rng.uniform();
    while (u >= 1.0) u = rng.uniform();
    const double k = std::sqrt(1.0 / ((1.0 - u) * (1.0 - u)) - 1.0) / decorrelation_length_m;
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    wave_x_(m) = k * std::cos(theta);
    wave_y_(m) = k * std::sin(theta);
    phase_(m) = rng.uniform(0.0, 2.0 * M_PI);
  }
  scale_ = std::sqrt(2.0 / static_cast<double>(num_components));
}

double ShadowingField::value(const Eigen::Vector2d& position) const {
  if (wave_x_.size() == 0) return 0.0;
  return scale_ * (wave_x_ * position.x() + wave_y_ * position.y() + phase_).cos().sum();
}

McsTable::McsTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("McsTable: empty table");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].sinr_threshold_db <= entries_[i - 1].sinr_threshold_db) {
      throw std::invalid_argument("McsTable: thresholds must be strictly increasing");
    }
    if (entries_[i].efficiency_bps_hz < entries_[i - 1].efficiency_bps_hz) {
      throw std::invalid_argument("McsTable: efficiencies must be non-decreasing");
    }
  }
}

double McsTable::efficiency(double sinr_db) const {
  if (entries_.empty()) throw std::logic_error("McsTable: table not configured");
  double eff = 0.0;
  for (const auto& entry : entries_) {
    if (sinr_db >= entry.sinr_threshold_db) {
      eff = entry.efficiency_bps_hz;
    } else {
      break;
    }
  }
  return eff;
}

McsTable McsTable::default_table() {
  // CQI 1..15 style mapping.
  return McsTable({{-6.7, 0.1523},
                   {-4.7, 0.2344},
                   {-2.3, 0.3770},
                   {0.2, 0.6016},
                   {2.4, 0.8770},
                   {4.3, 1.1758},
                   {5.9, 1.4766},
                   {8.1, 1.9141},
                   {10.3, 2.4063},
                   {11.7, 2.7305},
                   {14.1, 3.3223},
                   {16.3, 3.9023},
                   {18.7, 4.5234},
                   {21.0, 5.1152},
                   {22.7, 5.5547}});
}

McsTable McsTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("McsTable: cannot open " + path);
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double threshold, eff;
    if (ls >> threshold >> eff) {
      entries.push_back({threshold, eff});
    } else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
      throw std::runtime_error("McsTable: parse error at " + path + ":" +
                               std::to_string(line_no));
    }
  }
  return McsTable(std::move(entries));
}

double link_gain(double distance_m, bool cellular_link, bool rx_is_enb,
                 const ChannelParams& params, double shadow_db, double fading_linear) {
  const PathLossModel& pl = cellular_link ? params.pathloss_cellular : params.pathloss_d2d;
  const double rx_gain_db = rx_is_enb ? params.enb_antenna_gain_db : params.ue_antenna_gain_db;
  const double gain_db = -pl.loss_db(distance_m) - shadow_db + rx_gain_db;
  return db_to_linear(gain_db) * fading_linear;
}

Eigen::ArrayXd fading_factors(FadingMode mode, int num_subchannels, std::uint64_t seed,
                              std::uint64_t tti, std::uint64_t link_tag) {
  if (mode == FadingMode::kFlat) return Eigen::ArrayXd::Ones(num_subchannels);
  Rng rng = Rng::derive(seed, 0xfadeULL, tti, link_tag);
  Eigen::ArrayXd factors(num_subchannels);
  for (int k = 0; k < num_subchannels; ++k) factors(k) = rng.exponential();
  return factors;
}

double instantaneous_rate(double power_w, double gain, double interference_w,
                          double bandwidth_hz, double noise_density_w_hz) {
  if (power_w < 0.0 || interference_w < 0.0 || gain < 0.0) {
    throw std::domain_error("instantaneous_rate: negative input");
  }
  if (bandwidth_hz <= 0.0 || noise_density_w_hz <= 0.0) {
    throw std::domain_error("instantaneous_rate: bandwidth and noise density must be positive");
  }
  const double noise = noise_density_w_hz * bandwidth_hz;
  return bandwidth_hz * std::log2(1.0 + power_w * gain / (noise + interference_w));
}

double sinr_to_efficiency(double sinr_db, const McsTable& table) {
  return table.efficiency(sinr_db);
}

}  // namespace pfsim
