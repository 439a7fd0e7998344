#pragma once

// Hierarchical JSON run configuration: the full scenario tree plus the knobs
// of every experiment command. Temperatures are stored in kelvin (`_k` keys)
// so that a serialised config reloads to an identical value.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttesim/analysis.hpp"
#include "ttesim/sim.hpp"

namespace ttesim {

struct ScenarioASettings {
  double p_req = 0.5;  // W
  std::vector<double> t_env = {kZeroCelsius + 25.0, kZeroCelsius, kZeroCelsius - 10.0,
                               kZeroCelsius - 20.0};
  bool operator==(const ScenarioASettings&) const = default;
};

struct ThrottleSettings {
  std::vector<double> kappa_grid = {0.8, 0.85, 0.9, 0.95, 1.0};
  double t_min = 3.0 * 3600.0;  // s
  double epsilon = 0.05;
  bool operator==(const ThrottleSettings&) const = default;
};

struct SobolSettings {
  std::size_t n_base = 256;
  std::size_t inner_runs = 64;
  std::size_t n_bootstrap = 200;
  TteStatistic output = TteStatistic::T05;
  std::vector<SensitivityInput> inputs = default_sensitivity_inputs();
  bool operator==(const SobolSettings&) const = default;
};

struct ElasticitySettings {
  double delta_frac = 0.10;
  TteStatistic output = TteStatistic::T05;
  std::vector<SensitivityParam> inputs = all_sensitivity_params();
  bool operator==(const ElasticitySettings&) const = default;
};

struct FrontierSettings {
  std::vector<double> t_env = {kZeroCelsius + 25.0, kZeroCelsius, kZeroCelsius - 10.0,
                               kZeroCelsius - 20.0};
  std::vector<double> rho_ws = {1.0, 1.25, 1.5, 1.75, 2.0};
  double t_min = 3.0 * 3600.0;  // s
  bool operator==(const FrontierSettings&) const = default;
};

struct IdentifySettings {
  std::string data;  // CSV path
  bool discharge_negative = false;
  double q_max = 2.0;
  double i_threshold = 0.1;
  double z_start = 1.0;
  bool operator==(const IdentifySettings&) const = default;
};

struct ValidateSettings {
  std::string reference;  // CSV path: time_s, voltage_v[, current_a]
  std::optional<double> reference_tte;  // s; last reference timestamp when absent
  bool discharge_negative = false;
  bool operator==(const ValidateSettings&) const = default;
};

struct RunConfig {
  SimScenario scenario;
  std::size_t runs = 1000;
  unsigned workers = 1;
  std::string output_dir = "out";
  ThrottlePolicy policy;  // used by the throttle command whether or not enabled
  ScenarioASettings scenario_a;
  ThrottleSettings throttle;
  SobolSettings sobol;
  ElasticitySettings elasticity;
  FrontierSettings frontier;
  IdentifySettings identify;
  ValidateSettings validate;
};

bool operator==(const RunConfig& a, const RunConfig& b);
bool operator==(const SimScenario& a, const SimScenario& b);

/// Parses and validates; every problem is reported with its config path.
/// Throws ValidationError listing all of them.
RunConfig parse_config(const nlohmann::json& doc);

/// Empty (or whitespace-only) files yield the defaults. Throws IoError,
/// ParseError or ValidationError.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json serialize_config(const RunConfig& cfg);
nlohmann::json serialize_battery(const BatteryParams& b);

}  // namespace ttesim
