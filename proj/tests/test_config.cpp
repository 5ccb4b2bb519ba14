// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pfsim/config_io.hpp"
#include "pfsim/csv.hpp"

using namespace pfsim;

TEST_CASE("defaults survive a serialize/parse round trip") {
  const ScenarioConfig defaults;
  const std::string text = serialize_config(defaults);
  const ScenarioConfig parsed = parse_config_text(text, "<round-trip>");
  CHECK(serialize_config(parsed) == text);
}

TEST_CASE("values and overrides land in the right fields") {
  const std::string text =
      "[scenario]\n"
      "subchannels = 7\n"
      "cues = 4\n"
      "tier_rate_budget_cue = inf\n"
      "seed = 99\n"
      "[channel]\n"
      "noise_figure_db = 9.0\n";
  ScenarioConfig config = parse_config_text(text, "<test>");
  CHECK(config.num_subchannels == 7);
  CHECK(config.num_cues == 4);
  CHECK(std::isinf(config.tier_rate_budget_cue_bps));
  CHECK(config.seed == 99);
  CHECK(config.channel.noise_figure_db == 9.0);

  apply_override(config, "scenario.seed=123");
  CHECK(config.seed == 123);
  CHECK_THROWS_AS(apply_override(config, "scenario.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(config, "scenario.seed"), ConfigError);
}

TEST_CASE("unknown keys are rejected by name with their line number") {
  const std::string text = "[scenario]\nsubchannels = 5\nwibble = 3\n";
  try {
    parse_config_text(text, "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    CHECK(message.find("bad.cfg:3") != std::string::npos);
    CHECK(message.find("scenario.wibble") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_config_text("[scenario]\nsubchannels\n", "x.cfg"),
                       doctest::Contains("x.cfg:2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("subchannels = 5\n", "x.cfg"),
                       doctest::Contains("before any [section]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[scenario\n", "x.cfg"),
                       doctest::Contains("unterminated"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[scenario]\nsubchannels = five\n", "x.cfg"),
                       doctest::Contains("bad value"), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
  const std::string text =
      "# a comment\n"
      "\n"
      "[scenario]  # trailing\n"
      "subchannels = 9  # also trailing\n";
  CHECK(parse_config_text(text, "<test>").num_subchannels == 9);
}

TEST_CASE("missing config files are reported") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("csv builder enforces the column count") {
  CsvBuilder csv({"a", "b"});
  csv.cell(1).cell(2.5);
  csv.end_row();
  CHECK(csv.str() == "a,b\n1,2.5\n");
  csv.cell(3);
  CHECK_THROWS_AS(csv.end_row(), std::logic_error);
}

TEST_CASE("atomic writes land complete") {
  const std::string path = "test_config_atomic.tmp.csv";
  write_file_atomic(path, "x,y\n1,2\n");
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == "x,y\n1,2\n");
  std::remove(path.c_str());
}
