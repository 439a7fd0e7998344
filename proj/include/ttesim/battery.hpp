#pragma once

// First-order Thevenin cell with a lumped thermal node and Arrhenius-coupled
// series resistance. Discharge current is positive throughout.

#include <string>
#include <vector>

#include "ttesim/numerics.hpp"

namespace ttesim {

inline constexpr double kGasConstant = 8.314;  // J/(mol K)
inline constexpr double kZeroCelsius = 273.15;  // K

/// Piecewise-constant entropic coefficient dU/dT over SOC. `values[k]` applies
/// on [soc_breaks[k-1], soc_breaks[k]) with the first/last bins open-ended,
/// so values.size() == soc_breaks.size() + 1. An empty map is identically zero.
struct EntropicMap {
  std::vector<double> soc_breaks;
  std::vector<double> values;  // V/K

  [[nodiscard]] double operator()(double z) const noexcept;
  static EntropicMap constant(double value) { return {{}, {value}}; }

  friend bool operator==(const EntropicMap&, const EntropicMap&) = default;
};

struct BatteryParams {
  double q_max = 2.0;         // Ah
  double r_ref = 0.050;       // Ohm at t_ref
  double r_p = 0.020;         // Ohm
  double c_p = 4500.0;        // F
  double tau_p = 90.0;        // s, kept equal to r_p * c_p
  double e_a = 24000.0;       // J/mol
  double r_gas = kGasConstant;
  double t_ref = 298.15;      // K
  double m_c_th = 20.0;       // J/K
  double h_a = 0.35;          // W/K
  double eta = 0.90;
  double v_cut = 3.0;         // V
  double dt_persist = 2.0;    // s
  EntropicMap du_dT;
  MonotoneInterpolant ocv;    // U(z), V

  /// Empty when every invariant holds; otherwise one message per violation,
  /// each prefixed with the field name.
  [[nodiscard]] std::vector<std::string> violations() const;
  /// Throws InvalidParameters listing all violations.
  void validate() const;

  friend bool operator==(const BatteryParams&, const BatteryParams&) = default;
};

/// Table of the bundled generic Li-ion open-circuit voltage curve.
std::vector<double> default_ocv_soc();
std::vector<double> default_ocv_volts();
MonotoneInterpolant default_ocv();

/// Nominal 18650-class parameter set.
BatteryParams nominal_battery_params();

struct BatteryState {
  double z = 1.0;       // SOC
  double v_p = 0.0;     // V
  double t_core = 298.15;  // K

  friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

struct AgingParams {
  double r_fresh = 0.050;    // Ohm
  double q_design = 2.0;     // Ah
  double k_aging = 0.005;    // cycle^-1/2, placeholder (no measured value)
  double beta_fade = 2e-4;   // cycle^-1, placeholder (no measured value)
  double n_cycles = 0.0;

  [[nodiscard]] std::vector<std::string> violations() const;
  friend bool operator==(const AgingParams&, const AgingParams&) = default;
};

struct CurrentSolution {
  double current = 0.0;       // A
  double v_term = 0.0;        // V
  double discriminant = 0.0;  // V^2
  bool feasible = true;
};

struct StateRates {
  double dz = 0.0;    // 1/s
  double dv_p = 0.0;  // V/s
  double dT = 0.0;    // K/s
};

double arrhenius_r0(const BatteryParams& params, double t_core);

/// Throws CapacityExhausted when beta_fade * n_cycles >= 1.
BatteryParams apply_aging(const BatteryParams& params, const AgingParams& aging);

/// Open-circuit voltage minus polarization, E = U(z) - v_p.
inline double effective_voltage(const BatteryParams& params, const BatteryState& state) {
  return params.ocv(state.z) - state.v_p;
}

/// Constant-power solve of P = (E - I R0) I on the small-current branch.
CurrentSolution solve_current(const BatteryParams& params, const BatteryState& state, double p_batt);

/// Same as solve_current with R0 supplied by the caller.
CurrentSolution solve_current_with_r0(double e, double r0, double p_batt);

double power_capability(const BatteryParams& params, const BatteryState& state);

double heat_generation(const BatteryParams& params, const BatteryState& state, double current);

double instantaneous_efficiency(const BatteryParams& params, const BatteryState& state,
                                double p_load, double current);

StateRates state_derivatives(const BatteryParams& params, const BatteryState& state,
                             double current, double t_env);

/// Same, with R0(T) already evaluated by the caller.
StateRates state_derivatives(const BatteryParams& params, const BatteryState& state,
                             double current, double t_env, double r0);

}  // namespace ttesim
