#pragma once

// Resistance-aware throttling law. The gate closes when the cell is low or
// cold; while closed, device-side request power is capped at
// kappa * eta * P_max(x).

#include <string>
#include <vector>

#include "ttesim/battery.hpp"

namespace ttesim {

struct ThrottlePolicy {
  double kappa = 0.9;
  double z_crit = 0.15;
  double t_crit = kZeroCelsius;  // K
  double u_min = 0.2;
  bool active = true;

  [[nodiscard]] std::vector<std::string> violations() const;
  friend bool operator==(const ThrottlePolicy&, const ThrottlePolicy&) = default;
};

struct ThrottleDecision {
  double p_req = 0.0;  // W, after throttling
  double u = 1.0;
  bool gate_closed = false;
  bool floored = false;  // u_min bound was binding
};

/// Device-side cap kappa * eta * P_max.
double safe_power_cap(const BatteryParams& params, const BatteryState& state, double kappa);

ThrottleDecision throttle_request(const ThrottlePolicy& policy, const BatteryParams& params,
                                  const BatteryState& state, double p_req);

}  // namespace ttesim
