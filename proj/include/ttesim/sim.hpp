#pragma once

// Hybrid simulation: exact CTMC jumps interleaved with adaptive RK4 on the
// electro-thermal cell, first-passage shutdown detection with debounce, and
// Monte Carlo assembly of the time-to-empty distribution.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttesim/battery.hpp"
#include "ttesim/throttle.hpp"
#include "ttesim/usage.hpp"

namespace ttesim {

struct AblationSet {
  bool isothermal = false;       // R0 held at r_ref, dT/dt = 0
  bool no_burst = false;         // session load fixed at the mode mean
  bool no_polarization = false;  // v_p held at 0

  friend bool operator==(const AblationSet&, const AblationSet&) = default;
};

/// Deterministic piecewise-constant driver that replaces the usage chain when
/// non-empty. Power steps are device-side request power (W); current steps
/// impose the cell current (A) directly.
struct LoadProfile {
  enum class Kind { Power, Current };
  Kind kind = Kind::Power;
  std::vector<double> t_start;  // s, ascending, first entry 0
  std::vector<double> value;

  [[nodiscard]] bool empty() const noexcept { return t_start.empty(); }
  static LoadProfile constant_power(double p_req) { return {Kind::Power, {0.0}, {p_req}}; }
  friend bool operator==(const LoadProfile&, const LoadProfile&) = default;
};

struct SimScenario {
  BatteryParams battery = nominal_battery_params();
  std::optional<AgingParams> aging;
  UsageModel usage = default_usage_model();
  double t_env = kZeroCelsius;  // K
  BatteryState initial{1.0, 0.0, kZeroCelsius};
  double horizon = 24.0 * 3600.0;  // s
  std::size_t initial_mode = 0;
  std::optional<ThrottlePolicy> throttle;
  AblationSet ablation;
  std::uint64_t seed = 20240101;
  LoadProfile load_profile;

  /// One message per broken invariant, prefixed with a config-style path.
  [[nodiscard]] std::vector<std::string> violations() const;
};

// ---------------------------------------------------------------------------
// Shutdown detection
// ---------------------------------------------------------------------------

enum class ShutdownCause { VoltagePersist, InfeasiblePower, Horizon };

std::string_view cause_name(ShutdownCause cause) noexcept;

struct ShutdownDetector {
  std::optional<double> below_since;
  double dt_persist = 2.0;
};

struct ShutdownDecision {
  bool shutdown = false;
  double t_star = 0.0;
  ShutdownCause cause = ShutdownCause::Horizon;
};

/// Infeasible power shuts down at once. A sub-cutoff window shuts down once it
/// has lasted dt_persist, dated at the window start.
ShutdownDecision update_detector(ShutdownDetector& d, double v_term, double v_cut, bool feasible,
                                 double t);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TrajectoryPoint {
  double t = 0.0;
  double z = 0.0;
  double v_p = 0.0;
  double t_core = 0.0;
  double v_term = 0.0;
  double current = 0.0;
  std::size_t mode = 0;
  double p_req = 0.0;  // after throttling
  double u = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> series;  // only when requested
  double tte = 0.0;                     // s; horizon when censored
  bool censored = false;
  ShutdownCause cause = ShutdownCause::Horizon;
  double t_end = 0.0;                   // s, time the run stopped integrating
  double z_start = 0.0;
  double z_end = 0.0;
  double charge_as = 0.0;               // integral of I dt up to t_end
  double u_integral = 0.0;              // integral of u dt up to tte
  std::vector<double> soc_grid;         // z at 0, 60, 120, ... s while alive
  std::size_t jumps = 0;
  std::size_t steps = 0;
  std::size_t throttled_steps = 0;
  std::size_t floored_steps = 0;
};

inline constexpr double kEnvelopeGrid = 60.0;  // s

struct RunOptions {
  bool record_series = false;
};

Trajectory run_trajectory(const SimScenario& scenario, RngStream& rng, const RunOptions& opts = {});

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct RunRecord {
  std::size_t run_index = 0;  // 1-based stream id
  double tte = 0.0;
  ShutdownCause cause = ShutdownCause::Horizon;
  bool censored = false;
  bool fault = false;
  double u_integral = 0.0;
  double z_end = 0.0;
  double charge_error = 0.0;  // |q_max dz 3600 - int I dt| / (q_max 3600)
  std::size_t floored_steps = 0;
  std::size_t steps = 0;
};

struct EnvelopePoint {
  double t = 0.0;
  double p05 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  std::size_t survivors = 0;
};

struct TteDistribution {
  std::vector<RunRecord> runs;          // ordered by run index
  std::vector<double> samples;          // uncensored, fault-free tte in run order
  std::vector<std::pair<double, double>> survival;  // (t, S(t)) step points
  std::vector<std::pair<double, double>> quantiles;  // (q, t_q)
  double mean = 0.0;
  double censored_fraction = 0.0;
  std::size_t faults = 0;
  std::vector<EnvelopePoint> soc_envelope;

  /// Nearest-rank quantile of the uncensored samples.
  [[nodiscard]] double quantile(double q) const;
  /// Per-run tte with censored runs at the horizon; faulted runs are NaN.
  [[nodiscard]] std::vector<double> paired_values() const;
};

/// Replication i (1..n_runs) uses RngStream(scenario.seed, i). Results do not
/// depend on `workers`. Throws AllRunsCensored when no run shut down.
TteDistribution run_monte_carlo(const SimScenario& scenario, std::size_t n_runs,
                                unsigned workers = 1);

struct AblationRow {
  std::string variant;
  double mean_tte = 0.0;
  double t05 = 0.0;
  TteDistribution dist;
};

/// full, isothermal, no_burst, no_polarization with a shared seed.
std::vector<AblationRow> run_ablation_suite(const SimScenario& scenario, std::size_t n_runs,
                                            unsigned workers = 1);

/// Runs `count` independent jobs on up to `workers` threads.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

}  // namespace ttesim
