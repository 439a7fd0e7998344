#include "ttesim/usage.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace ttesim {

std::vector<std::string> ModeSpec::violations() const {
  std::vector<std::string> out;
  const double fsum = f_scr + f_cpu + f_net + f_bg;
  if (std::abs(fsum - 1.0) > 1e-9) out.emplace_back("fractions: must sum to 1");
  if (f_scr < 0 || f_cpu < 0 || f_net < 0 || f_bg < 0) {
    out.emplace_back("fractions: must be non-negative");
  }
  if (!(sigma_p > 0.0)) out.emplace_back("sigma_w: must be > 0");
  if (!(mu_p >= 0.0)) out.emplace_back("mu_w: must be >= 0");
  if (!(p_cap > mu_p)) out.emplace_back("p_cap_w: must exceed mu_w");
  return out;
}

std::vector<std::string> CtmcSpec::violations() const {
  std::vector<std::string> out;
  const std::size_t m = dwell_minutes.size();
  if (m < 2) out.emplace_back("dwell_min: need at least 2 modes");
  if (transition_mix.size() != m) {
    out.emplace_back("transition_mix: needs one row per mode");
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::string row = "transition_mix[" + std::to_string(i) + "]";
    if (!(dwell_minutes[i] > 0.0)) {
      out.push_back("dwell_min[" + std::to_string(i) + "]: must be > 0");
    }
    if (transition_mix[i].size() != m) {
      out.push_back(row + ": needs one entry per mode");
      continue;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (transition_mix[i][j] < 0.0) out.push_back(row + ": negative probability");
      sum += transition_mix[i][j];
    }
    if (std::abs(sum - 1.0) > 1e-9) out.push_back(row + ": off-diagonal entries must sum to 1");
  }
  return out;
}

std::vector<std::string> Multipliers::violations() const {
  std::vector<std::string> out;
  if (!(rho_b > 0.0 && rho_b <= 1.0)) out.emplace_back("rho_b: must lie in (0, 1]");
  if (!(rho_bg > 0.0 && rho_bg <= 1.0)) out.emplace_back("rho_bg: must lie in (0, 1]");
  if (!(rho_ws >= 1.0)) out.emplace_back("rho_ws: must be >= 1");
  return out;
}

std::vector<std::string> UsageModel::violations() const {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    for (auto& v : modes[k].violations()) out.push_back("modes[" + std::to_string(k) + "]." + v);
  }
  for (auto& v : ctmc.violations()) out.push_back(v);
  if (ctmc.size() != modes.size()) out.emplace_back("dwell_min: one entry per mode required");
  for (auto& v : multipliers.violations()) out.push_back("multipliers." + v);
  return out;
}

std::vector<ModeSpec> default_modes() {
  auto mode = [](std::string name, double mu, double sigma, double scr, double cpu, double net,
                 double bg) {
    return ModeSpec{std::move(name), mu, sigma, scr, cpu, net, bg, mu + 5.0 * sigma};
  };
  return {
      mode("Idle", 0.15, 0.05, 0.00, 0.20, 0.20, 0.60),
      mode("Social", 1.20, 0.30, 0.35, 0.25, 0.20, 0.20),
      mode("Video", 2.50, 0.40, 0.30, 0.35, 0.25, 0.10),
      mode("Gaming", 4.50, 0.80, 0.25, 0.55, 0.15, 0.05),
      mode("WeakSignal", 3.20, 0.60, 0.20, 0.25, 0.45, 0.10),
  };
}

CtmcSpec default_ctmc() {
  return CtmcSpec{
      {18.0, 6.0, 12.0, 4.0, 3.0},
      {
          {0.00, 0.45, 0.30, 0.15, 0.10},
          {0.35, 0.00, 0.25, 0.15, 0.25},
          {0.45, 0.25, 0.00, 0.20, 0.10},
          {0.55, 0.15, 0.15, 0.00, 0.15},
          {0.50, 0.30, 0.10, 0.10, 0.00},
      },
  };
}

UsageModel default_usage_model() { return UsageModel{default_modes(), default_ctmc(), {}, {}}; }

std::size_t find_mode(const std::vector<ModeSpec>& modes, const std::string& name) {
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].name == name) return k;
  }
  return modes.size();
}

GeneratorMatrix build_generator(const CtmcSpec& spec) {
  const std::size_t m = spec.size();
  if (spec.transition_mix.size() != m) {
    throw Error(Errc::InvalidMix, "transition mix needs one row per mode");
  }
  GeneratorMatrix q(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = spec.dwell_minutes[i];
    if (!(d > 0.0)) {
      throw Error(Errc::NonPositiveDwell, "mode " + std::to_string(i) + " dwell " + std::to_string(d));
    }
    const auto& row = spec.transition_mix[i];
    if (row.size() != m) throw Error(Errc::InvalidMix, "row " + std::to_string(i) + " has wrong length");
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (row[j] < 0.0) throw Error(Errc::InvalidMix, "negative probability in row " + std::to_string(i));
      sum += row[j];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(Errc::InvalidMix, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    double off = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      q(i, j) = row[j] / d;
      off += q(i, j);
    }
    // diagonal from the off-diagonals so the row sums to zero to rounding
    q(i, i) = -off;
  }
  return q;
}

CtmcSpec recover_ctmc(const GeneratorMatrix& q) {
  const std::size_t m = q.size();
  CtmcSpec spec;
  spec.dwell_minutes.resize(m);
  spec.transition_mix.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    const double d = 1.0 / q.exit_rate(i);
    spec.dwell_minutes[i] = d;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) spec.transition_mix[i][j] = q(i, j) / q.exit_rate(i);
    }
  }
  return spec;
}

double sample_dwell(const GeneratorMatrix& q, std::size_t mode, RngStream& rng, double rate_scale) {
  return rng.exponential(q.exit_rate(mode) * rate_scale);
}

std::size_t sample_transition(const GeneratorMatrix& q, std::size_t mode, RngStream& rng) {
  const double target = rng.uniform() * q.exit_rate(mode);
  double acc = 0.0;
  std::size_t last = mode;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j == mode || q(mode, j) <= 0.0) continue;
    acc += q(mode, j);
    last = j;
    if (target < acc) return j;
  }
  return last;  // rounding at the top end of the row
}

double sample_session_load(const ModeSpec& mode, RngStream& rng) {
  return sample_truncated_normal(mode.mu_p, mode.sigma_p, 0.0, mode.p_cap, rng);
}

LoadSample decompose_power(double p_load, const ModeSpec& mode, const Multipliers& mult,
                           double eta) {
  LoadSample s;
  s.p_load = p_load;
  s.p_scr = mult.rho_b * mode.f_scr * p_load;
  s.p_cpu = mode.f_cpu * p_load;
  s.p_net = mult.rho_ws * mode.f_net * p_load;
  s.p_bg = mult.rho_bg * mode.f_bg * p_load;
  s.p_req = s.p_scr + s.p_cpu + s.p_net + s.p_bg;
  s.p_batt = s.p_req / eta;
  return s;
}

ChainDiagnostics chain_diagnostics(const GeneratorMatrix& q, const std::vector<ModeSpec>& modes) {
  const auto m = static_cast<Eigen::Index>(q.size());
  // pi Q = 0 with sum(pi) = 1: replace one balance equation by normalisation.
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a(j, i) = q(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

  ChainDiagnostics d;
  d.stationary.assign(pi.data(), pi.data() + m);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i < modes.size() && modes[i].f_scr > 0.0) d.screen_on_share += d.stationary[i];
    d.jumps_per_day += d.stationary[i] * q.exit_rate(i) * 1440.0;
  }
  d.screen_on_hours_per_day = 24.0 * d.screen_on_share;
  return d;
}

}  // namespace ttesim
