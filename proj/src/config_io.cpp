// SPDX-License-Identifier: Apache-2.0
#include "pfsim/config_io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pfsim {
namespace {

double parse_double(const std::string& value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double parsed = std::stod(value, &used);
  if (used != value.size()) throw std::invalid_argument("trailing characters");
  return parsed;
}

long long parse_int(const std::string& value) {
  std::size_t used = 0;
  const long long parsed = std::stoll(value, &used);
  if (used != value.size()) throw std::invalid_argument("trailing characters");
  return parsed;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("expected true/false");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario.subchannels", [](ScenarioConfig& c, const std::string& v) { c.num_subchannels = static_cast<int>(parse_int(v)); }},
      {"scenario.cues", [](ScenarioConfig& c, const std::string& v) { c.num_cues = static_cast<int>(parse_int(v)); }},
      {"scenario.d2d_pairs", [](ScenarioConfig& c, const std::string& v) { c.num_d2d = static_cast<int>(parse_int(v)); }},
      {"scenario.window", [](ScenarioConfig& c, const std::string& v) { c.window = static_cast<int>(parse_int(v)); }},
      {"scenario.passes", [](ScenarioConfig& c, const std::string& v) { c.max_passes = static_cast<int>(parse_int(v)); }},
      {"scenario.seed", [](ScenarioConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v)); }},
      {"scenario.ttis", [](ScenarioConfig& c, const std::string& v) { c.ttis = static_cast<int>(parse_int(v)); }},
      {"scenario.tti_duration_s", [](ScenarioConfig& c, const std::string& v) { c.tti_duration_s = parse_double(v); }},
      {"scenario.cells", [](ScenarioConfig& c, const std::string& v) { c.cells = static_cast<int>(parse_int(v)); }},
      {"scenario.scheduler", [](ScenarioConfig& c, const std::string& v) { c.scheduler = v; }},
      {"scenario.tier_rate_budget_cue", [](ScenarioConfig& c, const std::string& v) { c.tier_rate_budget_cue_bps = parse_double(v); }},
      {"scenario.tier_rate_budget_d2d", [](ScenarioConfig& c, const std::string& v) { c.tier_rate_budget_d2d_bps = parse_double(v); }},
      {"scenario.d2d_min_distance", [](ScenarioConfig& c, const std::string& v) { c.d2d_min_distance_m = parse_double(v); }},
      {"scenario.d2d_max_distance", [](ScenarioConfig& c, const std::string& v) { c.d2d_max_distance_m = parse_double(v); }},
      {"scenario.ue_max_power_dbm", [](ScenarioConfig& c, const std::string& v) { c.ue_max_power_dbm = parse_double(v); }},
      {"scenario.avg_rate_init", [](ScenarioConfig& c, const std::string& v) { c.avg_rate_init_bps = parse_double(v); }},
      {"scenario.mobility", [](ScenarioConfig& c, const std::string& v) { c.mobility = parse_bool(v); }},
      {"scenario.validate_each_tti", [](ScenarioConfig& c, const std::string& v) { c.validate_each_tti = parse_bool(v); }},
      {"scenario.instrument", [](ScenarioConfig& c, const std::string& v) { c.instrument = parse_bool(v); }},
      {"scenario.enumeration_limit", [](ScenarioConfig& c, const std::string& v) { c.enumeration_limit = parse_double(v); }},
      {"scenario.fading", [](ScenarioConfig& c, const std::string& v) { c.fading = v; }},
      {"scenario.mcs_table", [](ScenarioConfig& c, const std::string& v) { c.mcs_table = v; }},
      {"layout.inter_site_distance", [](ScenarioConfig& c, const std::string& v) { c.inter_site_distance_m = parse_double(v); }},
      {"channel.carrier_freq_hz", [](ScenarioConfig& c, const std::string& v) { c.channel.carrier_freq_hz = parse_double(v); }},
      {"channel.pathloss_cell_intercept_db", [](ScenarioConfig& c, const std::string& v) { c.channel.pathloss_cellular.intercept_db = parse_double(v); }},
      {"channel.pathloss_cell_slope", [](ScenarioConfig& c, const std::string& v) { c.channel.pathloss_cellular.slope_db_per_decade = parse_double(v); }},
      {"channel.pathloss_d2d_intercept_db", [](ScenarioConfig& c, const std::string& v) { c.channel.pathloss_d2d.intercept_db = parse_double(v); }},
      {"channel.pathloss_d2d_slope", [](ScenarioConfig& c, const std::string& v) { c.channel.pathloss_d2d.slope_db_per_decade = parse_double(v); }},
      {"channel.shadowing_stddev_cell_db", [](ScenarioConfig& c, const std::string& v) { c.channel.shadowing_stddev_cell_db = parse_double(v); }},
      {"channel.shadowing_stddev_d2d_db", [](ScenarioConfig& c, const std::string& v) { c.channel.shadowing_stddev_d2d_db = parse_double(v); }},
      {"channel.decorrelation_length_m", [](ScenarioConfig& c, const std::string& v) { c.channel.decorrelation_length_m = parse_double(v); }},
      {"channel.enb_antenna_gain_db", [](ScenarioConfig& c, const std::string& v) { c.channel.enb_antenna_gain_db = parse_double(v); }},
      {"channel.ue_antenna_gain_db", [](ScenarioConfig& c, const std::string& v) { c.channel.ue_antenna_gain_db = parse_double(v); }},
      {"channel.noise_figure_db", [](ScenarioConfig& c, const std::string& v) { c.channel.noise_figure_db = parse_double(v); }},
      {"channel.noise_density_dbm_hz", [](ScenarioConfig& c, const std::string& v) { c.channel.noise_density_dbm_hz = parse_double(v); }},
      {"channel.subchannel_bandwidth_hz", [](ScenarioConfig& c, const std::string& v) { c.channel.bandwidth_hz = parse_double(v); }},
  };
  return table;
}

std::string format_double(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + key +
                        "' appears before any [section]");
    }
    const std::string full_key = section + "." + key;
    const auto it = setters().find(full_key);
    if (it == setters().end()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + full_key +
                        "'");
    }
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad value '" + value +
                        "' for '" + full_key + "': " + e.what());
    }
  }
  return config;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

void apply_override(ScenarioConfig& config, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + spec + "' must look like section.key=value");
  }
  const std::string key = trim(spec.substr(0, eq));
  const std::string value = trim(spec.substr(eq + 1));
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown key '" + key + "' in override");
  try {
    it->second(config, value);
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for '" + key + "': " + e.what());
  }
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "[scenario]\n";
  os << "subchannels = " << c.num_subchannels << "\n";
  os << "cues = " << c.num_cues << "\n";
  os << "d2d_pairs = " << c.num_d2d << "\n";
  os << "window = " << c.window << "\n";
  os << "passes = " << c.max_passes << "\n";
  os << "seed = " << c.seed << "\n";
  os << "ttis = " << c.ttis << "\n";
  os << "tti_duration_s = " << format_double(c.tti_duration_s) << "\n";
  os << "cells = " << c.cells << "\n";
  os << "scheduler = " << c.scheduler << "\n";
  os << "tier_rate_budget_cue = " << format_double(c.tier_rate_budget_cue_bps) << "\n";
  os << "tier_rate_budget_d2d = " << format_double(c.tier_rate_budget_d2d_bps) << "\n";
  os << "d2d_min_distance = " << format_double(c.d2d_min_distance_m) << "\n";
  os << "d2d_max_distance = " << format_double(c.d2d_max_distance_m) << "\n";
  os << "ue_max_power_dbm = " << format_double(c.ue_max_power_dbm) << "\n";
  os << "avg_rate_init = " << format_double(c.avg_rate_init_bps) << "\n";
  os << "mobility = " << (c.mobility ? "true" : "false") << "\n";
  os << "validate_each_tti = " << (c.validate_each_tti ? "true" : "false") << "\n";
  os << "instrument = " << (c.instrument ? "true" : "false") << "\n";
  os << "enumeration_limit = " << format_double(c.enumeration_limit) << "\n";
  os << "fading = " << c.fading << "\n";
  os << "mcs_table = " << c.mcs_table << "\n";
  os << "\n[layout]\n";
  os << "inter_site_distance = " << format_double(c.inter_site_distance_m) << "\n";
  os << "\n[channel]\n";
  os << "carrier_freq_hz = " << format_double(c.channel.carrier_freq_hz) << "\n";
  os << "pathloss_cell_intercept_db = " << format_double(c.channel.pathloss_cellular.intercept_db)
     << "\n";
  os << "pathloss_cell_slope = " << format_double(c.channel.pathloss_cellular.slope_db_per_decade)
     << "\n";
  os << "pathloss_d2d_intercept_db = " << format_double(c.channel.pathloss_d2d.intercept_db)
     << "\n";
  os << "pathloss_d2d_slope = " << format_double(c.channel.pathloss_d2d.slope_db_per_decade)
     << "\n";
  os << "shadowing_stddev_cell_db = " << format_double(c.channel.shadowing_stddev_cell_db) << "\n";
  os << "shadowing_stddev_d2d_db = " << format_double(c.channel.shadowing_stddev_d2d_db) << "\n";
  os << "decorrelation_length_m = " << format_double(c.channel.decorrelation_length_m) << "\n";
  os << "enb_antenna_gain_db = " << format_double(c.channel.enb_antenna_gain_db) << "\n";
  os << "ue_antenna_gain_db = " << format_double(c.channel.ue_antenna_gain_db) << "\n";
  os << "noise_figure_db = " << format_double(c.channel.noise_figure_db) << "\n";
  os << "noise_density_dbm_hz = " << format_double(c.channel.noise_density_dbm_hz) << "\n";
  os << "subchannel_bandwidth_hz = " << format_double(c.channel.bandwidth_hz) << "\n";
  return os.str();
}

std::string config_schema_help() {
  std::ostringstream os;
  os << "Config keys (section.key = value):\n"
     << "  scenario.subchannels          number of subchannels K (>= 1)\n"
     << "  scenario.cues                 CUEs per cell\n"
     << "  scenario.d2d_pairs            D2D pairs per cell\n"
     << "  scenario.window               PF averaging window T (>= 1)\n"
     << "  scenario.passes               allocate/adjust sweeps M (>= 1)\n"
     << "  scenario.seed                 master RNG seed (env PFSIM_SEED overrides)\n"
     << "  scenario.ttis                 number of 1 ms scheduling intervals\n"
     << "  scenario.tti_duration_s       interval length in seconds\n"
     << "  scenario.cells                1 (single cell) or 19 (wrap-around grid)\n"
     << "  scenario.scheduler            heuristic | optimal\n"
     << "  scenario.tier_rate_budget_cue total CUE-tier rate budget in bit/s (inf allowed)\n"
     << "  scenario.tier_rate_budget_d2d total D2D-tier rate budget in bit/s\n"
     << "  scenario.d2d_min_distance     D2D pairing annulus inner radius, metres\n"
     << "  scenario.d2d_max_distance     D2D pairing annulus outer radius, metres\n"
     << "  scenario.ue_max_power_dbm     UE transmit power cap\n"
     << "  scenario.avg_rate_init        initial average rate in bit/s (> 0)\n"
     << "  scenario.mobility             true | false\n"
     << "  scenario.validate_each_tti    check allocation invariants every TTI\n"
     << "  scenario.instrument           record operation counts\n"
     << "  scenario.enumeration_limit    optimal-scheduler pattern refusal threshold\n"
     << "  scenario.fading               auto | flat | rayleigh\n"
     << "  scenario.mcs_table            default | shannon | <path to table file>\n"
     << "  layout.inter_site_distance    cell grid spacing, metres\n"
     << "  channel.*                     path loss, shadowing, antenna, noise settings\n"
     << "                                (see configs/example.cfg for the full list)\n";
  return os.str();
}

}  // namespace pfsim
