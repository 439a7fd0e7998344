#pragma once

// Parameter identification from pulse/rest cycle data: OCV map from
// low-current discharge, R0 from the instantaneous voltage step, and the RC
// branch from the rest relaxation.

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "ttesim/battery.hpp"

namespace ttesim {

/// One cycle of time-series data, current positive on discharge.
struct CyclePulseRecord {
  std::vector<double> t;  // s
  std::vector<double> v;  // V
  std::vector<double> i;  // A
  std::string cycle_id;
  std::string cell_id;
};

/// CSV with header columns time_s, voltage_v, current_a, cycle_id, cell_id
/// (any order). Rows are grouped per (cell_id, cycle_id) in first-seen order.
/// With `discharge_negative` the current column is negated on load.
std::vector<CyclePulseRecord> ingest_cycles(const std::filesystem::path& path,
                                            bool discharge_negative = false);
std::vector<CyclePulseRecord> parse_cycles(std::istream& in, bool discharge_negative = false,
                                           const std::string& source = "<stream>");

void write_cycles_csv(const std::filesystem::path& path, const std::vector<CyclePulseRecord>& records,
                      bool discharge_negative = false);

struct OcvExtraction {
  std::vector<double> soc;    // ascending
  std::vector<double> volts;  // ascending
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMaxOcvKnots = 50;

/// Uses the longest run of samples with 0 < i <= i_threshold; SOC by Coulomb
/// counting from z_start at the segment start.
OcvExtraction extract_ocv(const CyclePulseRecord& record, double q_max, double i_threshold,
                          double z_start = 1.0);

inline constexpr double kStepThreshold = 0.5;  // A between adjacent samples
inline constexpr double kRestCurrent = 0.01;   // A, |i| at or below counts as rest

/// R0 = dV0 / dI at the largest adjacent-sample current step (first on ties).
double identify_ohmic(const CyclePulseRecord& record);

struct PolarizationEstimate {
  double r_p = 0.0;
  double c_p = 0.0;
  double tau_p = 0.0;
  double step_current = 0.0;
  RelaxationFit fit;
};

/// Fits the first rest segment that follows discharge.
PolarizationEstimate identify_polarization(const CyclePulseRecord& record);

struct IdentifiedParams {
  std::vector<double> ocv_soc;
  std::vector<double> ocv_volts;
  double r0 = 0.0;
  double r_p = 0.0;
  double c_p = 0.0;
  double tau_p = 0.0;
  double relaxation_rmse = 0.0;
  std::vector<std::string> warnings;
};

struct IdentifyOptions {
  double q_max = 2.0;          // Ah, for Coulomb counting
  double i_threshold = 0.1;    // A, quasi-static discharge ceiling
  double z_start = 1.0;
};

/// Runs the full pipeline over a set of records: the first record with a
/// usable step/rest supplies (R0, Rp, Cp); the first with a quasi-static
/// segment supplies the OCV knots (left empty with a warning otherwise).
IdentifiedParams identify(const std::vector<CyclePulseRecord>& records, const IdentifyOptions& opts);

/// Overrides r_ref, r_p, c_p, tau_p and (when >= 3 knots) the OCV map.
BatteryParams apply_identified(const BatteryParams& base, const IdentifiedParams& id);

/// Forward simulation of the cell under an imposed piecewise-constant current,
/// sampled every `dt_sample` seconds. `segments` are (duration s, current A).
/// Gaussian voltage noise with `noise_sigma` is added when positive.
CyclePulseRecord synthesize_record(const BatteryParams& params, BatteryState state, double t_env,
                                   const std::vector<std::pair<double, double>>& segments,
                                   double dt_sample, double noise_sigma = 0.0,
                                   std::uint64_t noise_seed = 1);

}  // namespace ttesim
