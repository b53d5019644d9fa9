#pragma once
#include "qiup/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qiup {

struct ScenarioInfo {
  std::string name;
  int figure; ///< figure reproduced; 0 for the generic imaging run
  std::string description;
};

/// Every runnable scenario, in a fixed order.
const std::vector<ScenarioInfo> &scenario_registry();
bool is_registered_scenario(std::string_view name);

struct Measurement {
  std::string name;
  double value{0.0};
  std::optional<double> uncertainty;
  std::optional<double> theory;
  std::string unit;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t config_hash{0};
  std::uint64_t seed{0};
  std::string config_echo;          ///< canonical config text
  std::vector<Measurement> derived; ///< closed-form quantities
  std::vector<Measurement> measured;
  std::vector<std::string> artifacts; ///< file names relative to the output directory
  std::vector<std::string> warnings;
  double seconds{0.0};

  const Measurement *find(std::string_view name) const;
  /// Structured text written to summary.txt (everything except timing).
  std::string to_text() const;
};

/// Runs the configured scenario and writes its artifacts into
/// config.output_dir. On failure every artifact written so far is removed.
RunSummary run_scenario(const RunConfig &config);

} // namespace qiup
