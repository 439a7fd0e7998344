#pragma once

// Sensitivity and robustness studies on top of the Monte Carlo engine:
// local elasticities, variance-based (Sobol) indices, the (T_env, rho_ws)
// risk frontier, usage-structure perturbations and trace validation metrics.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttesim/sim.hpp"

namespace ttesim {

enum class SensitivityParam { TEnv, QMax, RRef, HA, Eta, RhoB, RhoBg, RhoWs };

std::string_view param_name(SensitivityParam p) noexcept;
std::optional<SensitivityParam> parse_param(std::string_view name) noexcept;
std::vector<SensitivityParam> all_sensitivity_params();

double get_param(const SimScenario& sc, SensitivityParam p);
/// Setting t_env also resets the initial core temperature to ambient.
void set_param(SimScenario& sc, SensitivityParam p, double value);

struct SensitivityInput {
  SensitivityParam param = SensitivityParam::TEnv;
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const SensitivityInput&, const SensitivityInput&) = default;
};

/// Plausible ranges for every perturbable input (t_env in K).
std::vector<SensitivityInput> default_sensitivity_inputs();

enum class TteStatistic { Mean, T05 };

std::string_view statistic_name(TteStatistic s) noexcept;
std::optional<TteStatistic> parse_statistic(std::string_view name) noexcept;
double tte_statistic(const TteDistribution& d, TteStatistic s);

// ---------------------------------------------------------------------------
// Local elasticity
// ---------------------------------------------------------------------------

struct Elasticity {
  SensitivityParam param = SensitivityParam::TEnv;
  double base_value = 0.0;
  double base_output = 0.0;
  double plus_output = 0.0;
  double elasticity = 0.0;  // (dY/Y) / (dtheta/theta), forward difference
};

/// Forward finite difference at +delta_frac of the base value, both
/// evaluations sharing the scenario seed (common random numbers).
Elasticity local_elasticity(const SimScenario& sc, SensitivityParam p, double delta_frac,
                            std::size_t n_runs, TteStatistic stat, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Sobol indices
// ---------------------------------------------------------------------------

struct SobolIndex {
  std::string name;
  double s1 = 0.0;
  double s1_lo = 0.0;
  double s1_hi = 0.0;
  double st = 0.0;
  double st_lo = 0.0;
  double st_hi = 0.0;
};

struct SobolResult {
  std::vector<SobolIndex> indices;
  std::size_t n_base = 0;
  std::size_t evaluations = 0;
  double variance = 0.0;
  double mean = 0.0;
};

struct SobolOptions {
  std::size_t n_base = 256;
  std::size_t n_bootstrap = 200;
  double ci_level = 0.95;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

using ScalarModel = std::function<double(std::span<const double>)>;

/// Saltelli radial design from a Sobol low-discrepancy sequence with the
/// Jansen estimators and bootstrap confidence intervals. Ranges may collapse
/// to a point (lo == hi). Throws DegenerateVariance when the output does not
/// vary over the design.
SobolResult sobol_indices(const ScalarModel& model, const std::vector<std::pair<double, double>>& ranges,
                          const std::vector<std::string>& names, const SobolOptions& opts);

/// Each design point runs `inner_runs` Monte Carlo replications with the
/// scenario seed and reduces them with `stat`.
SobolResult sobol_indices(const SimScenario& sc, const std::vector<SensitivityInput>& inputs,
                          std::size_t inner_runs, TteStatistic stat, SobolOptions opts);

double ishigami(std::span<const double> x, double a = 7.0, double b = 0.1);

// ---------------------------------------------------------------------------
// Risk frontier
// ---------------------------------------------------------------------------

struct FrontierCell {
  double t_env = 0.0;   // K
  double rho_ws = 0.0;
  double t05 = 0.0;     // s
  bool violates = false;  // t05 < t_min
};

struct FrontierPoint {
  enum class Status { Crossing, Unbounded, AllBelow };
  double t_env = 0.0;
  Status status = Status::Unbounded;
  double rho_ws = 0.0;  // interpolated crossing when status == Crossing
};

struct RiskFrontier {
  std::vector<FrontierCell> cells;  // row-major: t_env outer, rho_ws inner
  std::vector<FrontierPoint> columns;  // one per t_env

  /// True when no column has a finite crossing.
  [[nodiscard]] bool empty() const;
};

RiskFrontier risk_frontier(const SimScenario& sc, std::vector<double> t_env_grid,
                           std::vector<double> rho_ws_grid, double t_min, std::size_t n_runs,
                           unsigned workers = 1);

// ---------------------------------------------------------------------------
// Usage perturbation
// ---------------------------------------------------------------------------

CtmcSpec scale_dwell(const CtmcSpec& spec, double factor);

/// Adds `delta` of outgoing probability toward the three highest-power modes
/// (split in proportion to the existing weights) and renormalises each row.
CtmcSpec bias_high_power(const CtmcSpec& spec, const std::vector<ModeSpec>& modes, double delta);

struct PerturbationRow {
  std::string variant;
  double mean = 0.0;
  double t05 = 0.0;
  double d_mean_pct = 0.0;
  double d_t05_pct = 0.0;
};

/// baseline, dwell_x0.8, dwell_x1.2, high_power_bias, all with the same seed.
std::vector<PerturbationRow> usage_perturbation_study(const SimScenario& sc, std::size_t n_runs,
                                                      unsigned workers = 1);

// ---------------------------------------------------------------------------
// Validation and paired comparisons
// ---------------------------------------------------------------------------

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> v;
};

/// Terminal voltage over the recorded series of a trajectory.
TimeSeries voltage_series(const Trajectory& tr);

/// Reference CSV with columns time_s, voltage_v and optionally current_a
/// (discharge positive unless `discharge_negative`). Throws IoError,
/// SchemaError or NonMonotoneTime.
struct ReferenceTrace {
  TimeSeries trace;
  std::vector<double> current;  // empty when the column is absent
};

ReferenceTrace read_reference_trace(const std::filesystem::path& path, bool discharge_negative = false);
void write_reference_trace(const std::filesystem::path& path, const ReferenceTrace& ref);

/// Current profile that holds each sample's current until the next sample,
/// with time measured from the first sample.
LoadProfile current_profile(const ReferenceTrace& ref);

struct ValidationReport {
  double mape = 0.0;       // %, over reference points inside the overlap
  double delta_tau = 0.0;  // s, absolute difference
  std::size_t n_points = 0;
};

/// The prediction is linearly interpolated at reference timestamps in
/// [max(starts), min(ends)]. Throws NoOverlap when none qualify.
ValidationReport validation_metrics(const TimeSeries& predicted, const TimeSeries& reference,
                                    double tau_predicted, double tau_reference);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using SampleStatistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap interval for stat(b) - stat(a), resampling pairs
/// (a_k, b_k) jointly. NaN pairs are dropped.
Interval paired_bootstrap_ci(std::span<const double> a, std::span<const double> b,
                             const SampleStatistic& stat, std::size_t n_boot = 1000,
                             double level = 0.95, std::uint64_t seed = 7);

double sample_mean(std::span<const double> x);

}  // namespace ttesim
