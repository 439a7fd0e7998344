#include "ttesim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace ttesim {

std::string_view cause_name(ShutdownCause cause) noexcept {
  switch (cause) {
    case ShutdownCause::VoltagePersist: return "voltage_persist";
    case ShutdownCause::InfeasiblePower: return "infeasible_power";
    case ShutdownCause::Horizon: return "horizon";
  }
  return "unknown";
}

std::vector<std::string> SimScenario::violations() const {
  std::vector<std::string> out;
  for (auto& v : battery.violations()) out.push_back("battery." + v);
  if (aging) {
    for (auto& v : aging->violations()) out.push_back("aging." + v);
  }
  for (auto& v : usage.violations()) out.push_back("usage." + v);
  if (throttle) {
    for (auto& v : throttle->violations()) out.push_back("throttle." + v);
  }
  if (!(horizon > 0.0)) out.emplace_back("scenario.horizon_s: must be > 0");
  if (!(initial.z > 0.0 && initial.z <= 1.0)) out.emplace_back("scenario.initial.soc: must lie in (0, 1]");
  if (!(initial.t_core > 0.0)) out.emplace_back("scenario.initial.t_core_k: must be > 0");
  if (!std::isfinite(initial.v_p)) out.emplace_back("scenario.initial.v_p: must be finite");
  if (!(t_env > 0.0)) out.emplace_back("scenario.t_env_k: must be > 0");
  if (load_profile.empty() && initial_mode >= usage.modes.size()) {
    out.emplace_back("scenario.initial_mode: out of range");
  }
  if (!load_profile.empty()) {
    if (load_profile.t_start.size() != load_profile.value.size()) {
      out.emplace_back("scenario.load_profile: t_s and value lengths differ");
    } else {
      if (load_profile.t_start.front() != 0.0) {
        out.emplace_back("scenario.load_profile: first step must start at t = 0");
      }
      for (std::size_t k = 1; k < load_profile.t_start.size(); ++k) {
        if (!(load_profile.t_start[k] > load_profile.t_start[k - 1])) {
          out.emplace_back("scenario.load_profile: step times must increase");
          break;
        }
      }
      for (double v : load_profile.value) {
        if (!(v >= 0.0)) {
          out.emplace_back("scenario.load_profile: values must be >= 0");
          break;
        }
      }
    }
  }
  // Debounce resolution equals the integration step, so the window must be longer.
  if (!(battery.dt_persist > kMaxStep)) {
    out.emplace_back("battery.dt_persist_s: must exceed the 1 s maximum integration step");
  }
  return out;
}

ShutdownDecision update_detector(ShutdownDetector& d, double v_term, double v_cut, bool feasible,
                                 double t) {
  if (!feasible) return {true, t, ShutdownCause::InfeasiblePower};
  if (v_term <= v_cut) {
    if (!d.below_since) d.below_since = t;
    // 1e-9 s slack absorbs rounding in accumulated step times
    if (t - *d.below_since >= d.dt_persist - 1e-9) {
      return {true, *d.below_since, ShutdownCause::VoltagePersist};
    }
  } else {
    d.below_since.reset();
  }
  return {};
}

namespace {

constexpr std::array<double, 4> kTolerance{1e-7, 1e-5, 1e-4, 1e-3};  // z, v_p, T, charge

struct Prepared {
  BatteryParams params;
  GeneratorMatrix q;
  bool isothermal;
  bool no_polarization;
};

Prepared prepare(const SimScenario& sc) {
  Prepared p{sc.aging ? apply_aging(sc.battery, *sc.aging) : sc.battery, {}, sc.ablation.isothermal,
             sc.ablation.no_polarization};
  if (p.isothermal) p.params.e_a = 0.0;
  if (sc.load_profile.empty()) p.q = build_generator(sc.usage.ctmc);
  return p;
}

// Current drawn at state x under the held load. Inside an RK4 stage an
// infeasible request is evaluated at the maximum-power current; the detector
// catches infeasibility at step boundaries.
struct HeldLoad {
  bool is_current = false;
  double value = 0.0;  // p_batt (W) or current (A)
};

CurrentSolution current_at_r0(const BatteryParams& params, const BatteryState& s,
                              const HeldLoad& load, double r0) {
  const double e = effective_voltage(params, s);
  if (load.is_current) {
    return CurrentSolution{load.value, e - load.value * r0, e * e, true};
  }
  return solve_current_with_r0(e, r0, load.value);
}

CurrentSolution current_at(const BatteryParams& params, const BatteryState& s, const HeldLoad& load) {
  return current_at_r0(params, s, load, arrhenius_r0(params, s.t_core));
}

Trajectory simulate(const SimScenario& sc, const Prepared& prep, RngStream& rng,
                    const RunOptions& opts) {
  const BatteryParams& params = prep.params;
  const bool ctmc = sc.load_profile.empty();

  Trajectory tr;
  BatteryState state = sc.initial;
  if (prep.no_polarization) state.v_p = 0.0;
  tr.z_start = state.z;

  // segment bookkeeping
  std::size_t mode = sc.initial_mode;
  std::size_t profile_idx = 0;
  double seg_end = 0.0;
  double p_req_raw = 0.0;  // device-side request for the current segment (power kind)
  double i_imposed = 0.0;  // current kind

  auto enter_mode = [&](double t_now) {
    const double scale = sc.usage.rate_scaling ? sc.usage.rate_scaling(mode, state.z) : 1.0;
    const double dwell_s = 60.0 * sample_dwell(prep.q, mode, rng, scale);
    const ModeSpec& spec = sc.usage.modes[mode];
    // The draw is consumed even without bursts so variants stay paired.
    const double drawn = sample_session_load(spec, rng);
    const double p_load = sc.ablation.no_burst ? spec.mu_p : drawn;
    p_req_raw = decompose_power(p_load, spec, sc.usage.multipliers, params.eta).p_req;
    seg_end = t_now + dwell_s;
  };
  auto enter_profile_step = [&]() {
    const auto& lp = sc.load_profile;
    if (lp.kind == LoadProfile::Kind::Power) {
      p_req_raw = lp.value[profile_idx];
    } else {
      i_imposed = lp.value[profile_idx];
    }
    seg_end = profile_idx + 1 < lp.t_start.size() ? lp.t_start[profile_idx + 1]
                                                  : std::numeric_limits<double>::infinity();
  };

  if (ctmc) {
    enter_mode(0.0);
  } else {
    enter_profile_step();
  }

  ShutdownDetector det{std::nullopt, params.dt_persist};
  double t = 0.0;
  double next_grid = kEnvelopeGrid;
  double charge = 0.0;
  double u_int = 0.0;
  double u_int_at_window = 0.0;
  tr.soc_grid.push_back(state.z);

  auto finish = [&](double tte, ShutdownCause cause, bool censored, double u_at_tte) {
    tr.tte = tte;
    tr.cause = cause;
    tr.censored = censored;
    tr.t_end = t;
    tr.z_end = state.z;
    tr.charge_as = charge;
    tr.u_integral = u_at_tte;
    const auto alive = static_cast<std::size_t>(std::floor(tte / kEnvelopeGrid + 1e-9)) + 1;
    if (tr.soc_grid.size() > alive) tr.soc_grid.resize(alive);
    return tr;
  };

  auto check = [&](const CurrentSolution& sol, double at) -> std::optional<ShutdownDecision> {
    const bool was_below = det.below_since.has_value();
    const auto dec = update_detector(det, sol.v_term, params.v_cut, sol.feasible, at);
    if (!was_below && det.below_since) u_int_at_window = u_int;
    if (dec.shutdown) return dec;
    return std::nullopt;
  };

  for (;;) {
    // Load held over the next step, with the throttle decided at its start.
    HeldLoad held;
    double u = 1.0;
    double p_req_eff = p_req_raw;
    if (!ctmc && sc.load_profile.kind == LoadProfile::Kind::Current) {
      held = {true, i_imposed};
      p_req_eff = 0.0;
    } else {
      if (sc.throttle) {
        const auto d = throttle_request(*sc.throttle, params, state, p_req_raw);
        p_req_eff = d.p_req;
        u = d.u;
        if (d.gate_closed && d.u < 1.0) ++tr.throttled_steps;
        if (d.floored) ++tr.floored_steps;
      }
      held = {false, p_req_eff / params.eta};
    }

    const auto sol_now = current_at(params, state, held);
    if (const auto dec = check(sol_now, t)) {
      const double u_at = dec->cause == ShutdownCause::VoltagePersist ? u_int_at_window : u_int;
      return finish(dec->t_star, dec->cause, false, u_at);
    }
    if (t >= sc.horizon) return finish(sc.horizon, ShutdownCause::Horizon, true, u_int);

    const double step_end = std::min({seg_end, next_grid, sc.horizon, t + kMaxStep});
    const double t_env = sc.t_env;
    auto deriv = [&](double, const std::array<double, 4>& x) {
      const BatteryState s{x[0], x[1], x[2]};
      const double r0 = arrhenius_r0(params, s.t_core);
      auto sol = current_at_r0(params, s, held, r0);
      if (!sol.feasible) sol.current = effective_voltage(params, s) / (2.0 * r0);
      const StateRates r = state_derivatives(params, s, sol.current, t_env, r0);
      return std::array<double, 4>{r.dz, prep.no_polarization ? 0.0 : r.dv_p,
                                   prep.isothermal ? 0.0 : r.dT, sol.current};
    };
    const std::array<double, 4> x0{state.z, state.v_p, state.t_core, charge};
    const auto step = rk4_adaptive_step<4>(x0, deriv, t, step_end - t, kTolerance);
    const double t_new = step.dt_used >= step_end - t ? step_end : t + step.dt_used;
    state = BatteryState{step.state[0], step.state[1], step.state[2]};
    charge = step.state[3];
    u_int += u * (t_new - t);
    t = t_new;
    ++tr.steps;

    const auto sol_end = current_at(params, state, held);
    if (opts.record_series) {
      tr.series.push_back({t, state.z, state.v_p, state.t_core, sol_end.v_term, sol_end.current,
                           ctmc ? mode : profile_idx, p_req_eff, u});
    }
    if (const auto dec = check(sol_end, t)) {
      const double u_at = dec->cause == ShutdownCause::VoltagePersist ? u_int_at_window : u_int;
      return finish(dec->t_star, dec->cause, false, u_at);
    }
    if (t == next_grid) {
      tr.soc_grid.push_back(state.z);
      next_grid += kEnvelopeGrid;
    }
    if (t == seg_end) {
      if (ctmc) {
        mode = sample_transition(prep.q, mode, rng);
        ++tr.jumps;
        enter_mode(t);
      } else {
        ++profile_idx;
        enter_profile_step();
      }
    }
  }
}

}  // namespace

Trajectory run_trajectory(const SimScenario& scenario, RngStream& rng, const RunOptions& opts) {
  return simulate(scenario, prepare(scenario), rng, opts);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double TteDistribution::quantile(double q) const { return empirical_quantile(samples, q); }

std::vector<double> TteDistribution::paired_values() const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) {
    out.push_back(r.fault ? std::numeric_limits<double>::quiet_NaN() : r.tte);
  }
  return out;
}

TteDistribution run_monte_carlo(const SimScenario& scenario, std::size_t n_runs, unsigned workers) {
  if (n_runs == 0) throw Error(Errc::InvalidParameters, "n_runs must be >= 1");
  const Prepared prep = prepare(scenario);

  std::vector<RunRecord> records(n_runs);
  std::vector<std::vector<double>> grids(n_runs);
  parallel_for(n_runs, workers, [&](std::size_t i) {
    RngStream rng(scenario.seed, i + 1);
    RunRecord& rec = records[i];
    rec.run_index = i + 1;
    try {
      Trajectory tr = simulate(scenario, prep, rng, {});
      rec.tte = tr.tte;
      rec.cause = tr.cause;
      rec.censored = tr.censored;
      rec.u_integral = tr.u_integral;
      rec.z_end = tr.z_end;
      const double scale = prep.params.q_max * 3600.0;
      rec.charge_error = std::abs(scale * (tr.z_start - tr.z_end) - tr.charge_as) / scale;
      rec.floored_steps = tr.floored_steps;
      rec.steps = tr.steps;
      grids[i] = std::move(tr.soc_grid);
    } catch (const Error& e) {
      if (e.code() != Errc::StepUnderflow) throw;
      rec.fault = true;
    }
  });

  TteDistribution dist;
  dist.runs = std::move(records);
  std::size_t censored = 0;
  std::size_t valid = 0;
  for (const auto& r : dist.runs) {
    if (r.fault) {
      ++dist.faults;
      continue;
    }
    ++valid;
    if (r.censored) {
      ++censored;
    } else {
      dist.samples.push_back(r.tte);
    }
  }
  dist.censored_fraction = valid ? static_cast<double>(censored) / static_cast<double>(valid) : 0.0;
  if (dist.samples.empty()) {
    throw Error(Errc::AllRunsCensored, "no replication reached shutdown before the horizon");
  }

  double sum = 0.0;
  for (double s : dist.samples) sum += s;
  dist.mean = sum / static_cast<double>(dist.samples.size());
  for (double q : {0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95}) {
    dist.quantiles.emplace_back(q, dist.quantile(q));
  }

  // Survival over all fault-free runs; censored runs stay alive to the horizon.
  std::vector<double> sorted = dist.samples;
  std::sort(sorted.begin(), sorted.end());
  dist.survival.emplace_back(0.0, 1.0);
  const auto n_valid = static_cast<double>(valid);
  for (std::size_t k = 0; k < sorted.size();) {
    std::size_t j = k;
    while (j < sorted.size() && sorted[j] == sorted[k]) ++j;
    const double s = 1.0 - static_cast<double>(j) / n_valid;
    if (sorted[k] == 0.0) {
      dist.survival.front().second = s;
    } else {
      dist.survival.emplace_back(sorted[k], s);
    }
    k = j;
  }

  std::size_t longest = 0;
  for (const auto& g : grids) longest = std::max(longest, g.size());
  std::vector<double> column;
  for (std::size_t k = 0; k < longest; ++k) {
    column.clear();
    for (const auto& g : grids) {
      if (k < g.size()) column.push_back(g[k]);
    }
    dist.soc_envelope.push_back({static_cast<double>(k) * kEnvelopeGrid,
                                 empirical_quantile(column, 0.05), empirical_quantile(column, 0.50),
                                 empirical_quantile(column, 0.95), column.size()});
  }
  return dist;
}

std::vector<AblationRow> run_ablation_suite(const SimScenario& scenario, std::size_t n_runs,
                                            unsigned workers) {
  struct Variant {
    const char* name;
    AblationSet set;
  };
  const Variant variants[] = {
      {"full", {}},
      {"isothermal", {true, false, false}},
      {"no_burst", {false, true, false}},
      {"no_polarization", {false, false, true}},
  };
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    SimScenario sc = scenario;
    sc.ablation = v.set;
    auto dist = run_monte_carlo(sc, n_runs, workers);
    rows.push_back({v.name, dist.mean, dist.quantile(0.05), std::move(dist)});
  }
  return rows;
}

}  // namespace ttesim
