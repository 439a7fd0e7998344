#include "ttesim/control.hpp"

#include <algorithm>

namespace ttesim {

PolicyEvaluation evaluate_policy(const SimScenario& scenario, const ThrottlePolicy& policy,
                                 std::size_t n_runs, double t_min, double epsilon,
                                 unsigned workers) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(Errc::InvalidParameters, "epsilon must lie in (0, 1)");
  }
  SimScenario sc = scenario;
  sc.throttle = policy;

  PolicyEvaluation ev;
  ev.tte = run_monte_carlo(sc, n_runs, workers);

  double j_sum = 0.0;
  std::size_t valid = 0;
  std::size_t violations = 0;
  std::size_t steps = 0;
  std::size_t floored = 0;
  for (const auto& r : ev.tte.runs) {
    if (r.fault) continue;
    ++valid;
    j_sum += r.u_integral;
    if (!r.censored && r.tte < t_min) ++violations;
    steps += r.steps;
    floored += r.floored_steps;
  }
  ev.j_mean = valid ? j_sum / static_cast<double>(valid) : 0.0;
  ev.p_violation = valid ? static_cast<double>(violations) / static_cast<double>(valid) : 0.0;
  ev.constraint_ok = ev.p_violation <= epsilon;
  ev.floor_fraction = steps ? static_cast<double>(floored) / static_cast<double>(steps) : 0.0;
  return ev;
}

std::vector<ParetoPoint> pareto_sweep(const SimScenario& scenario, const ThrottlePolicy& policy,
                                      std::vector<double> kappa_grid, std::size_t n_runs,
                                      unsigned workers) {
  std::sort(kappa_grid.begin(), kappa_grid.end());
  std::vector<ParetoPoint> out;
  for (double kappa : kappa_grid) {
    if (!(kappa > 0.0 && kappa <= 1.0)) {
      throw Error(Errc::InvalidParameters, "kappa values must lie in (0, 1]");
    }
    ThrottlePolicy p = policy;
    p.kappa = kappa;
    // t_min and epsilon do not affect J or t_0.05
    const auto ev = evaluate_policy(scenario, p, n_runs, 0.0, 0.05, workers);
    out.push_back({kappa, ev.j_mean, ev.tte.quantile(0.05)});
  }
  return out;
}

}  // namespace ttesim
