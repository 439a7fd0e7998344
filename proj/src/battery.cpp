#include "ttesim/battery.hpp"

#include <cmath>
#include <sstream>

namespace ttesim {

double EntropicMap::operator()(double z) const noexcept {
  if (values.empty()) return 0.0;
  const auto it = std::upper_bound(soc_breaks.begin(), soc_breaks.end(), z);
  return values[static_cast<std::size_t>(it - soc_breaks.begin())];
}

std::vector<double> default_ocv_soc() {
  return {0.00, 0.02, 0.035, 0.05, 0.08, 0.10, 0.15, 0.20, 0.30,
          0.40, 0.50, 0.60,  0.70, 0.80, 0.90, 0.95, 1.00};
}

std::vector<double> default_ocv_volts() {
  return {2.00, 2.60, 2.88, 3.03, 3.30, 3.42, 3.52, 3.58, 3.65,
          3.70, 3.74, 3.79, 3.86, 3.94, 4.04, 4.10, 4.18};
}

MonotoneInterpolant default_ocv() {
  return MonotoneInterpolant(default_ocv_soc(), default_ocv_volts());
}

BatteryParams nominal_battery_params() {
  BatteryParams p;
  p.ocv = default_ocv();
  return p;
}

std::vector<std::string> BatteryParams::violations() const {
  std::vector<std::string> out;
  auto require = [&out](bool ok, const char* field, const char* rule) {
    if (!ok) out.push_back(std::string(field) + ": " + rule);
  };
  require(q_max > 0.0, "q_max", "must be > 0");
  require(r_ref > 0.0, "r_ref", "must be > 0");
  require(r_p > 0.0, "r_p", "must be > 0");
  require(c_p > 0.0, "c_p", "must be > 0");
  require(tau_p > 0.0 && std::abs(tau_p - r_p * c_p) <= 1e-9 * tau_p, "tau_p",
          "must equal r_p * c_p within 1e-9 relative");
  require(e_a >= 0.0, "e_a", "must be >= 0");
  require(r_gas > 0.0, "r_gas", "must be > 0");
  require(t_ref > 0.0, "t_ref", "must be > 0");
  require(m_c_th > 0.0, "m_c_th", "must be > 0");
  require(h_a > 0.0, "h_a", "must be > 0");
  require(eta > 0.0 && eta <= 1.0, "eta", "must lie in (0, 1]");
  require(v_cut > 0.0, "v_cut", "must be > 0");
  require(dt_persist >= 0.0, "dt_persist", "must be >= 0");
  if (du_dT.values.size() != du_dT.soc_breaks.size() + 1 && !du_dT.values.empty()) {
    out.emplace_back("du_dT: needs exactly one more value than soc_breaks");
  }
  if (!std::is_sorted(du_dT.soc_breaks.begin(), du_dT.soc_breaks.end())) {
    out.emplace_back("du_dT: soc_breaks must be ascending");
  }
  if (ocv.empty()) {
    out.emplace_back("ocv: missing");
  } else {
    const auto& ys = ocv.knots_y();
    for (std::size_t i = 1; i < ys.size(); ++i) {
      if (!(ys[i] > ys[i - 1])) {
        out.emplace_back("ocv: volts must be strictly increasing in SOC");
        break;
      }
    }
  }
  return out;
}

void BatteryParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i];
  throw Error(Errc::InvalidParameters, os.str());
}

std::vector<std::string> AgingParams::violations() const {
  std::vector<std::string> out;
  if (!(n_cycles >= 0.0)) out.emplace_back("n_cycles: must be >= 0");
  if (!(k_aging >= 0.0)) out.emplace_back("k_aging: must be >= 0");
  if (!(beta_fade >= 0.0)) out.emplace_back("beta_fade: must be >= 0");
  if (!(beta_fade * n_cycles < 1.0)) out.emplace_back("beta_fade: capacity fades to zero");
  if (!(r_fresh > 0.0)) out.emplace_back("r_fresh: must be > 0");
  if (!(q_design > 0.0)) out.emplace_back("q_design: must be > 0");
  return out;
}

double arrhenius_r0(const BatteryParams& params, double t_core) {
  return params.r_ref * std::exp(params.e_a / params.r_gas * (1.0 / t_core - 1.0 / params.t_ref));
}

BatteryParams apply_aging(const BatteryParams& params, const AgingParams& aging) {
  const double remaining = 1.0 - aging.beta_fade * aging.n_cycles;
  if (!(remaining > 0.0)) {
    throw Error(Errc::CapacityExhausted,
                "beta_fade * n_cycles = " + std::to_string(aging.beta_fade * aging.n_cycles));
  }
  BatteryParams out = params;
  out.r_ref = aging.r_fresh * (1.0 + aging.k_aging * std::sqrt(aging.n_cycles));
  out.q_max = aging.q_design * remaining;
  return out;
}

CurrentSolution solve_current_with_r0(double e, double r0, double p_batt) {
  CurrentSolution sol;
  sol.discriminant = e * e - 4.0 * r0 * p_batt;
  if (p_batt == 0.0) {
    sol.current = 0.0;
    sol.v_term = e;
    return sol;
  }
  if (e <= 0.0) {
    throw Error(Errc::NegativeEffectiveVoltage,
                "effective voltage " + std::to_string(e) + " V under positive load");
  }
  if (sol.discriminant < 0.0) {
    sol.feasible = false;
    sol.current = 0.0;
    sol.v_term = e;
    return sol;
  }
  // 2P / (E + sqrt(D)) is the small root (E - sqrt(D)) / (2 R0) without cancellation.
  sol.current = 2.0 * p_batt / (e + std::sqrt(sol.discriminant));
  sol.v_term = e - sol.current * r0;
  return sol;
}

CurrentSolution solve_current(const BatteryParams& params, const BatteryState& state,
                              double p_batt) {
  return solve_current_with_r0(effective_voltage(params, state),
                               arrhenius_r0(params, state.t_core), p_batt);
}

double power_capability(const BatteryParams& params, const BatteryState& state) {
  const double e = effective_voltage(params, state);
  return e * e / (4.0 * arrhenius_r0(params, state.t_core));
}

namespace {

double heat_with_r0(const BatteryParams& params, const BatteryState& state, double current,
                    double r0) {
  return current * current * r0 + state.v_p * state.v_p / params.r_p +
         current * state.t_core * params.du_dT(state.z);
}

}  // namespace

double heat_generation(const BatteryParams& params, const BatteryState& state, double current) {
  return heat_with_r0(params, state, current, arrhenius_r0(params, state.t_core));
}

double instantaneous_efficiency(const BatteryParams& params, const BatteryState& state,
                                double p_load, double current) {
  const double losses = current * current * arrhenius_r0(params, state.t_core) +
                        state.v_p * state.v_p / params.r_p;
  const double denom = p_load + losses;
  if (denom <= 0.0) return 1.0;
  return p_load / denom;
}

StateRates state_derivatives(const BatteryParams& params, const BatteryState& state,
                             double current, double t_env) {
  return state_derivatives(params, state, current, t_env, arrhenius_r0(params, state.t_core));
}

StateRates state_derivatives(const BatteryParams& params, const BatteryState& state,
                             double current, double t_env, double r0) {
  StateRates r;
  r.dz = -current / (3600.0 * params.q_max);
  r.dv_p = -state.v_p / params.tau_p + current / params.c_p;
  r.dT = (heat_with_r0(params, state, current, r0) - params.h_a * (state.t_core - t_env)) /
         params.m_c_th;
  return r;
}

}  // namespace ttesim
