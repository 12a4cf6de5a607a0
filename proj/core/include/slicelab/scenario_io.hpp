#pragma once

// Scenario files: YAML with nested sections. The full schema is described in
// docs/file_formats.md; every key except `slices`, `topology`,
// `initial_alloc` and `new_slice` is optional and falls back to the defaults
// below.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slicelab/domain.hpp"
#include "slicelab/osra.hpp"
#include "slicelab/simulator.hpp"

namespace slicelab {

struct BaselineConfig {
  double budget_split = 0.5;      // share of tau given to the network stages
  double margin = 0.1;            // best-effort headroom over lambda
  double histogram_bin_ms = 0.25;

  bool operator==(const BaselineConfig&) const = default;
};

struct ScenarioConfig {
  Scenario scenario;  // slices, topology and the initial allocation
  SliceId new_slice = 0;
  SimConfig sim;
  OsraConfig osra;
  DelayStatistic statistic;  // statistic the probed slice is judged by
  int penalty_exponent = 2;
  BaselineConfig baseline;
  std::vector<std::uint64_t> seeds{1};

  bool operator==(const ScenarioConfig&) const = default;
};

// All problems with the configuration, including those of the scenario.
std::vector<std::string> check_scenario_config(const ScenarioConfig& config);
void validate_scenario_config(const ScenarioConfig& config);

// Throws ParseError naming the offending key.
ScenarioConfig parse_scenario_yaml(const std::string& text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

std::string to_yaml(const ScenarioConfig& config);

}  // namespace slicelab
