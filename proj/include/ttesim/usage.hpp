#pragma once

// Stochastic load side: user-activity modes, the CTMC over them, and the
// split of a session load into screen / cpu / network / background parts.

#include <functional>
#include <string>
#include <vector>

#include "ttesim/numerics.hpp"

namespace ttesim {

struct ModeSpec {
  std::string name;
  double mu_p = 0.0;     // W
  double sigma_p = 0.0;  // W
  double f_scr = 0.0;
  double f_cpu = 0.0;
  double f_net = 0.0;
  double f_bg = 0.0;
  double p_cap = 0.0;    // W, upper truncation

  [[nodiscard]] std::vector<std::string> violations() const;
  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

/// Mean dwell per mode (minutes) and the destination mix. transition_mix[i][i]
/// is ignored and conventionally zero.
struct CtmcSpec {
  std::vector<double> dwell_minutes;
  std::vector<std::vector<double>> transition_mix;

  [[nodiscard]] std::size_t size() const noexcept { return dwell_minutes.size(); }
  [[nodiscard]] std::vector<std::string> violations() const;
  friend bool operator==(const CtmcSpec&, const CtmcSpec&) = default;
};

/// Row-major M x M rate matrix in 1/min.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  explicit GeneratorMatrix(std::size_t m) : m_(m), q_(m * m, 0.0) {}

  [[nodiscard]] std::size_t size() const noexcept { return m_; }
  double& operator()(std::size_t i, std::size_t j) { return q_[i * m_ + j]; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return q_[i * m_ + j]; }
  /// Outgoing rate of mode i, -q_ii, in 1/min.
  [[nodiscard]] double exit_rate(std::size_t i) const { return -(*this)(i, i); }

 private:
  std::size_t m_ = 0;
  std::vector<double> q_;
};

struct Multipliers {
  double rho_b = 1.0;
  double rho_bg = 1.0;
  double rho_ws = 1.0;

  [[nodiscard]] std::vector<std::string> violations() const;
  friend bool operator==(const Multipliers&, const Multipliers&) = default;
};

struct LoadSample {
  double p_load = 0.0;
  double p_scr = 0.0;
  double p_cpu = 0.0;
  double p_net = 0.0;
  double p_bg = 0.0;
  double p_req = 0.0;
  double p_batt = 0.0;
};

/// Optional SOC-dependent scale on a mode's outgoing rate, evaluated at mode
/// entry: (mode index, z) -> factor > 0.
using RateScaling = std::function<double(std::size_t, double)>;

struct UsageModel {
  std::vector<ModeSpec> modes;
  CtmcSpec ctmc;
  Multipliers multipliers;
  RateScaling rate_scaling;  // empty means constant 1

  [[nodiscard]] std::vector<std::string> violations() const;
};

/// Modes of the bundled five-mode smartphone chain with p_cap = mu + 5 sigma.
std::vector<ModeSpec> default_modes();
CtmcSpec default_ctmc();
UsageModel default_usage_model();

/// Index of a mode by name, or modes.size() when absent.
std::size_t find_mode(const std::vector<ModeSpec>& modes, const std::string& name);

GeneratorMatrix build_generator(const CtmcSpec& spec);

/// Inverse of build_generator.
CtmcSpec recover_ctmc(const GeneratorMatrix& q);

/// Exponential dwell in minutes with rate -q_ii (times `rate_scale`).
double sample_dwell(const GeneratorMatrix& q, std::size_t mode, RngStream& rng,
                    double rate_scale = 1.0);

/// Destination j != mode with probability q_ij / -q_ii.
std::size_t sample_transition(const GeneratorMatrix& q, std::size_t mode, RngStream& rng);

double sample_session_load(const ModeSpec& mode, RngStream& rng);

LoadSample decompose_power(double p_load, const ModeSpec& mode, const Multipliers& mult, double eta);

struct ChainDiagnostics {
  std::vector<double> stationary;     // pi, sums to 1
  double screen_on_share = 0.0;       // stationary mass on modes with f_scr > 0
  double screen_on_hours_per_day = 0.0;
  double jumps_per_day = 0.0;
};

/// Stationary behaviour of the chain; used to audit calibration claims.
ChainDiagnostics chain_diagnostics(const GeneratorMatrix& q, const std::vector<ModeSpec>& modes);

}  // namespace ttesim
