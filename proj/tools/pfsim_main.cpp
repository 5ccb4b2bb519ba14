// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scenario runs, heuristic-vs-optimal comparisons,
// parameter sweeps and complexity tables, all emitting CSV plus a manifest
// that reproduces the run byte-for-byte.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pfsim/config_io.hpp"
#include "pfsim/csv.hpp"
#include "pfsim/metrics.hpp"
#include "pfsim/scenario.hpp"
#include "pfsim/version.hpp"

namespace {

using pfsim::ScenarioConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  cmd->add_option("-c,--config", args.config_path, "scenario config file")
      ->required(config_required);
  cmd->add_option("-o,--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides, "override a config key, e.g. --set scenario.seed=7");
}

ScenarioConfig load_config(const CommonArgs& args) {
  ScenarioConfig config = pfsim::parse_config_file(args.config_path);
  for (const auto& spec : args.overrides) pfsim::apply_override(config, spec);
  if (const char* env_seed = std::getenv("PFSIM_SEED")) {
    pfsim::apply_override(config, std::string("scenario.seed=") + env_seed);
  }
  config.validate();
  return config;
}

std::string scenario_id(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "K" << c.num_subchannels << "_C" << c.num_cues << "_D" << c.num_d2d << "_T" << c.window
     << "_M" << c.max_passes << "_cells" << c.cells << "_" << c.scheduler;
  return os.str();
}

void write_manifest(const std::string& path, const ScenarioConfig& config,
                    const std::string& command, const std::vector<std::string>& outputs,
                    double wall_seconds, const std::string& seed_list = "") {
  std::ostringstream os;
  os << "# pfsim manifest (rerun with: pfsim " << command << " -c <this file>)\n";
  os << "# version: " << pfsim::kVersion << "\n";
  os << "# command: " << command << "\n";
  if (!seed_list.empty()) os << "# seeds: " << seed_list << "\n";
  os << "# outputs:";
  for (const auto& out : outputs) os << " " << out;
  os << "\n# wall_clock_s: " << wall_seconds << "\n\n";
  os << pfsim::serialize_config(config);
  pfsim::write_file_atomic(path, os.str());
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

int cmd_run(const CommonArgs& args) {
  const ScenarioConfig config = load_config(args);
  std::filesystem::create_directories(args.out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  const pfsim::MetricSeries series = pfsim::run_scenario(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  pfsim::CsvBuilder per_tti({"tti", "tier", "user_id", "rate_bps", "avg_rate_bps"});
  for (int t = 0; t < config.ttis; ++t) {
    for (int u = 0; u < series.cue_rates_bps.cols(); ++u) {
      per_tti.cell(t).cell("cue").cell(u).cell(series.cue_rates_bps(t, u))
          .cell(series.cue_avg_bps(t, u));
      per_tti.end_row();
    }
    for (int u = 0; u < series.d2d_rates_bps.cols(); ++u) {
      per_tti.cell(t).cell("d2d").cell(u).cell(series.d2d_rates_bps(t, u))
          .cell(series.d2d_avg_bps(t, u));
      per_tti.end_row();
    }
  }

  pfsim::CsvBuilder summary({"scenario_id", "seed", "tier", "user_id", "mean_rate_bps",
                             "logsum_tier", "utility_total", "wf_calls", "iterations_used"});
  const std::string id = scenario_id(config);
  for (int u = 0; u < series.cue_rates_bps.cols(); ++u) {
    summary.cell(id).cell(config.seed).cell("cue").cell(u)
        .cell(series.cue_rates_bps.col(u).mean())
        .cell(series.final_logsum_cue())
        .cell(series.utility_last)
        .cell(series.wf_calls_cue)
        .cell(series.iterations_last);
    summary.end_row();
  }
  for (int u = 0; u < series.d2d_rates_bps.cols(); ++u) {
    summary.cell(id).cell(config.seed).cell("d2d").cell(u)
        .cell(series.d2d_rates_bps.col(u).mean())
        .cell(series.final_logsum_d2d())
        .cell(series.utility_last)
        .cell(series.wf_calls_d2d)
        .cell(series.iterations_last);
    summary.end_row();
  }

  pfsim::write_file_atomic(args.out_dir + "/per_tti.csv", per_tti.str());
  pfsim::write_file_atomic(args.out_dir + "/summary.csv", summary.str());
  write_manifest(args.out_dir + "/manifest.cfg", config, "run",
                 {"per_tti.csv", "summary.csv"}, wall);

  std::cout << "run " << id << " seed " << config.seed << ": " << config.ttis << " TTIs, logsum(cue) "
            << series.final_logsum_cue() << ", logsum(d2d) " << series.final_logsum_d2d()
            << ", violations " << series.violations << "\n";
  std::cout << "wrote " << args.out_dir << "/per_tti.csv, summary.csv, manifest.cfg\n";
  return 0;
}

int cmd_compare(const CommonArgs& args, int num_seeds) {
  ScenarioConfig config = load_config(args);
  config.cells = 1;

  const double joint = pfsim::count_joint_patterns(config.num_cues, config.num_d2d,
                                                   config.num_subchannels);
  if (joint > config.enumeration_limit) {
    std::cerr << "compare refused: " << joint << " joint patterns exceed the limit "
              << config.enumeration_limit << " (optimal-scheduler complexity estimate "
              << pfsim::complexity_estimate(pfsim::SchedulerKind::kOptimal, config.num_cues,
                                            config.num_d2d, config.num_subchannels,
                                            config.max_passes)
              << ")\n";
    return 2;
  }

  std::filesystem::create_directories(args.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  const pfsim::SchedulerConfig sched = config.scheduler_config();
  pfsim::CsvBuilder csv({"seed", "utility_heuristic", "utility_optimal", "ratio", "dominance_ok"});
  std::vector<double> ratios;
  int dominance_failures = 0;
  for (int s = 0; s < num_seeds; ++s) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
    const pfsim::NetworkState state = pfsim::random_instant_state(config, seed);
    const pfsim::ScheduleOutcome heuristic = pfsim::heuristic_pf_schedule(state, sched);
    const pfsim::ScheduleOutcome optimal = pfsim::optimal_pf_schedule(state, sched);
    const bool dominated = heuristic.utility <= optimal.utility + 1e-9;
    if (!dominated) ++dominance_failures;
    const double ratio = optimal.utility > 0.0 ? heuristic.utility / optimal.utility : 1.0;
    ratios.push_back(ratio);
    csv.cell(seed).cell(heuristic.utility).cell(optimal.utility).cell(ratio)
        .cell(std::string(dominated ? "1" : "0"));
    csv.end_row();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  pfsim::write_file_atomic(args.out_dir + "/compare.csv", csv.str());
  std::ostringstream seeds;
  seeds << config.seed << ".." << config.seed + static_cast<std::uint64_t>(num_seeds - 1);
  write_manifest(args.out_dir + "/manifest.cfg", config, "compare", {"compare.csv"}, wall,
                 seeds.str());

  std::cout << "compare over " << num_seeds << " seeds: median ratio " << median(ratios)
            << ", dominance failures " << dominance_failures << "\n";
  std::cout << "wrote " << args.out_dir << "/compare.csv\n";
  return dominance_failures == 0 ? 0 : 1;
}

int apply_axis(ScenarioConfig& config, const std::string& axis, double value) {
  const int v = static_cast<int>(value);
  if (axis == "N_C") {
    config.num_cues = v;
  } else if (axis == "N_D") {
    config.num_d2d = v;
  } else if (axis == "K") {
    config.num_subchannels = v;
  } else if (axis == "M") {
    config.max_passes = v;
  } else {
    return -1;
  }
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, const std::vector<double>& values,
              int num_seeds) {
  if (values.empty()) {
    std::cerr << "sweep: need at least one --values entry\n";
    return 2;
  }
  const ScenarioConfig base = load_config(args);
  std::filesystem::create_directories(args.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  pfsim::CsvBuilder csv({"axis", "axis_value", "seed", "metric", "tier", "value"});
  for (const double value : values) {
    for (int s = 0; s < num_seeds; ++s) {
      ScenarioConfig config = base;
      if (apply_axis(config, axis, value) != 0) {
        std::cerr << "sweep: axis must be one of N_C, N_D, K, M\n";
        return 2;
      }
      config.seed = base.seed + static_cast<std::uint64_t>(s);
      config.validate();
      const pfsim::MetricSeries series = pfsim::run_scenario(config);

      const auto emit = [&](const std::string& metric, const std::string& tier, double v) {
        csv.cell(axis).cell(value).cell(config.seed).cell(metric).cell(tier).cell(v);
        csv.end_row();
      };
      emit("logsum", "cue", series.final_logsum_cue());
      emit("logsum", "d2d", series.final_logsum_d2d());
      emit("total_rate_bps", "cue", series.mean_tier_throughput_cue());
      emit("total_rate_bps", "d2d", series.mean_tier_throughput_d2d());
      emit("total_rate_bps", "all",
           series.mean_tier_throughput_cue() + series.mean_tier_throughput_d2d());
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  pfsim::write_file_atomic(args.out_dir + "/sweep.csv", csv.str());
  std::ostringstream seeds;
  seeds << base.seed << ".." << base.seed + static_cast<std::uint64_t>(num_seeds - 1);
  write_manifest(args.out_dir + "/manifest.cfg", base, "sweep", {"sweep.csv"}, wall, seeds.str());
  std::cout << "wrote " << args.out_dir << "/sweep.csv (" << values.size() << " values x "
            << num_seeds << " seeds)\n";
  return 0;
}

int cmd_complexity(int cues, int d2d, int subchannels, int passes) {
  const double optimal = pfsim::complexity_estimate(pfsim::SchedulerKind::kOptimal, cues, d2d,
                                                    subchannels, passes);
  const double heuristic = pfsim::complexity_estimate(pfsim::SchedulerKind::kHeuristic, cues, d2d,
                                                      subchannels, passes);
  std::cout << "scheduler    operations\n";
  std::cout << "optimal      " << optimal << "\n";
  std::cout << "heuristic    " << heuristic << "\n";
  std::cout << "ratio        " << optimal / heuristic << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proportional-fair scheduling simulator for SC-FDMA cellular systems with D2D "
               "underlay"};
  app.set_version_flag("--version", pfsim::kVersion);
  bool show_schema = false;
  app.add_flag("--config-keys", show_schema, "print the config file schema and exit");

  CommonArgs run_args, compare_args, sweep_args;
  int compare_seeds = 50;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  int sweep_seeds = 1;
  int cx_cues = 1, cx_d2d = 1, cx_subchannels = 1, cx_passes = 1;

  CLI::App* run = app.add_subcommand("run", "run one scenario and write per-TTI + summary CSVs");
  add_common(run, run_args);

  CLI::App* compare = app.add_subcommand(
      "compare", "run the heuristic and the exhaustive optimum on identical states");
  add_common(compare, compare_args);
  compare->add_option("--seeds", compare_seeds, "number of seeded instances");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep one axis and emit long-format CSV");
  add_common(sweep, sweep_args);
  sweep->add_option("--axis", sweep_axis, "axis: N_C, N_D, K or M")->required();
  sweep->add_option("--values", sweep_values, "axis values")->required()->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "seeds per value");

  CLI::App* complexity =
      app.add_subcommand("complexity", "print closed-form operation counts for both schedulers");
  complexity->add_option("--cues", cx_cues, "number of CUEs")->required();
  complexity->add_option("--d2d", cx_d2d, "number of D2D pairs")->required();
  complexity->add_option("--subchannels", cx_subchannels, "number of subchannels")->required();
  complexity->add_option("--passes", cx_passes, "outer sweeps M");

  CLI11_PARSE(app, argc, argv);

  if (show_schema) {
    std::cout << pfsim::config_schema_help();
    return 0;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (compare->parsed()) return cmd_compare(compare_args, compare_seeds);
    if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_axis, sweep_values, sweep_seeds);
    if (complexity->parsed()) return cmd_complexity(cx_cues, cx_d2d, cx_subchannels, cx_passes);
  } catch (const pfsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pfsim::EnumerationLimitExceeded& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << app.help();
  return 0;
}
