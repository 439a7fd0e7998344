#pragma once

// Policy-in-the-loop evaluation of the throttling law: performance
// J = E[int_0^tau u dt], the tail constraint P(tau < t_min) <= eps, and a
// sweep over kappa.

#include <vector>

#include "ttesim/sim.hpp"
#include "ttesim/throttle.hpp"

namespace ttesim {

struct PolicyEvaluation {
  double j_mean = 0.0;  // s
  TteDistribution tte;
  double p_violation = 0.0;  // empirical P(tau < t_min)
  bool constraint_ok = false;
  double floor_fraction = 0.0;  // share of steps where u_min was binding
};

PolicyEvaluation evaluate_policy(const SimScenario& scenario, const ThrottlePolicy& policy,
                                 std::size_t n_runs, double t_min, double epsilon,
                                 unsigned workers = 1);

struct ParetoPoint {
  double kappa = 0.0;
  double j_mean = 0.0;  // s
  double t05 = 0.0;     // s
};

/// Sorted by kappa; every point shares the scenario seed. `policy` supplies
/// the gate thresholds and u_min.
std::vector<ParetoPoint> pareto_sweep(const SimScenario& scenario, const ThrottlePolicy& policy,
                                      std::vector<double> kappa_grid, std::size_t n_runs,
                                      unsigned workers = 1);

}  // namespace ttesim
