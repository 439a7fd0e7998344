#include "ttesim/throttle.hpp"

#include <algorithm>

namespace ttesim {

std::vector<std::string> ThrottlePolicy::violations() const {
  std::vector<std::string> out;
  if (!(kappa > 0.0 && kappa <= 1.0)) out.emplace_back("kappa: must lie in (0, 1]");
  if (!(u_min > 0.0 && u_min <= 1.0)) out.emplace_back("u_min: must lie in (0, 1]");
  if (!(z_crit >= 0.0 && z_crit <= 1.0)) out.emplace_back("z_crit: must lie in [0, 1]");
  if (!(t_crit >= 0.0)) out.emplace_back("t_crit_k: must be >= 0");
  return out;
}

double safe_power_cap(const BatteryParams& params, const BatteryState& state, double kappa) {
  return kappa * params.eta * power_capability(params, state);
}

ThrottleDecision throttle_request(const ThrottlePolicy& policy, const BatteryParams& params,
                                  const BatteryState& state, double p_req) {
  ThrottleDecision d{p_req, 1.0, false, false};
  if (!policy.active) return d;
  d.gate_closed = state.z < policy.z_crit || state.t_core < policy.t_crit;
  if (!d.gate_closed || p_req <= 0.0) return d;

  const double cap = safe_power_cap(params, state, policy.kappa);
  if (p_req <= cap) return d;
  d.u = std::max(cap, 0.0) / p_req;
  if (d.u < policy.u_min) {
    d.u = policy.u_min;
    d.floored = true;
  }
  d.p_req = d.u * p_req;
  return d;
}

}  // namespace ttesim
