#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ttesim/analysis.hpp"

using namespace ttesim;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return Errc::IoError;
}

SimScenario quick_scenario() {
  SimScenario sc;
  sc.initial.z = 0.5;
  sc.seed = 314;
  return sc;
}

}  // namespace

TEST_CASE("elasticity of an input the model ignores is exactly zero") {
  SimScenario sc = quick_scenario();
  for (auto& m : sc.usage.modes) {
    m.f_cpu += m.f_net;
    m.f_net = 0.0;
  }
  const auto e = local_elasticity(sc, SensitivityParam::RhoWs, 0.1, 30, TteStatistic::T05);
  CHECK(e.elasticity == 0.0);
  CHECK(e.base_output == e.plus_output);
}

TEST_CASE("capacity elasticity is one when energy limited") {
  SimScenario sc = quick_scenario();
  sc.t_env = sc.battery.t_ref;
  sc.initial = {1.0, 0.0, sc.battery.t_ref};
  sc.load_profile = LoadProfile::constant_power(0.3);
  const auto e = local_elasticity(sc, SensitivityParam::QMax, 0.1, 1, TteStatistic::Mean);
  CHECK(e.elasticity == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("cold resistance elasticity is negative") {
  SimScenario sc = quick_scenario();
  set_param(sc, SensitivityParam::TEnv, kZeroCelsius - 10.0);
  const auto e = local_elasticity(sc, SensitivityParam::RRef, 0.1, 60, TteStatistic::T05);
  CHECK(e.elasticity < 0.0);
}

TEST_CASE("elasticity preconditions") {
  CHECK(code_of([] { local_elasticity(quick_scenario(), SensitivityParam::QMax, 0.0, 5, TteStatistic::Mean); }) ==
        Errc::InvalidParameters);
}

TEST_CASE("sensitivity parameter names round-trip") {
  for (auto p : all_sensitivity_params()) CHECK(parse_param(param_name(p)) == p);
  CHECK_FALSE(parse_param("nope").has_value());
  SimScenario sc;
  set_param(sc, SensitivityParam::TEnv, 260.0);
  CHECK(sc.initial.t_core == 260.0);
  CHECK(get_param(sc, SensitivityParam::TEnv) == 260.0);
}

TEST_CASE("sobol on an additive function has no interactions") {
  const ScalarModel f = [](std::span<const double> x) { return x[0] + 2.0 * x[1] + 0.5 * x[2]; };
  SobolOptions opts;
  opts.n_base = 1024;
  const auto r = sobol_indices(f, {{0, 1}, {0, 1}, {0, 1}}, {"a", "b", "c"}, opts);
  // analytic shares: variances 1, 4, 0.25 over 5.25
  const double expected[] = {1.0 / 5.25, 4.0 / 5.25, 0.25 / 5.25};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.indices[i].s1 == doctest::Approx(expected[i]).epsilon(0.1));
    CHECK(std::abs(r.indices[i].st - r.indices[i].s1) < 0.05);
    CHECK(r.indices[i].s1_lo <= r.indices[i].s1);
    CHECK(r.indices[i].s1 <= r.indices[i].s1_hi);
    CHECK(r.indices[i].st_lo <= r.indices[i].st);
    CHECK(r.indices[i].st <= r.indices[i].st_hi);
  }
}

TEST_CASE("sobol on ishigami detects the interaction") {
  SobolOptions opts;
  opts.n_base = 1024;
  const double pi = M_PI;
  const auto r = sobol_indices([](std::span<const double> x) { return ishigami(x); },
                               {{-pi, pi}, {-pi, pi}, {-pi, pi}}, {"x1", "x2", "x3"}, opts);
  CHECK(std::abs(r.indices[0].s1 - 0.3139) < 0.05);
  CHECK(std::abs(r.indices[1].s1 - 0.4424) < 0.05);
  CHECK(std::abs(r.indices[2].s1) < 0.05);
  CHECK(r.indices[2].st > 0.15);
}

TEST_CASE("collapsed input range contributes nothing") {
  SobolOptions opts;
  opts.n_base = 256;
  const double pi = M_PI;
  const auto r = sobol_indices([](std::span<const double> x) { return ishigami(x); },
                               {{-pi, pi}, {-pi, pi}, {0.5, 0.5}}, {"x1", "x2", "x3"}, opts);
  // the total-order estimator differences vanish identically; the first-order
  // one is only zero in expectation
  CHECK(r.indices[2].st == 0.0);
  CHECK(std::abs(r.indices[2].s1) < 0.1);
  CHECK(r.indices[2].s1_lo <= 0.0);
  CHECK(r.indices[2].s1_hi >= 0.0);
}

TEST_CASE("sobol preconditions") {
  const ScalarModel f = [](std::span<const double> x) { return x[0]; };
  SobolOptions opts;
  opts.n_base = 100;
  CHECK(code_of([&] { sobol_indices(f, {{0, 1}, {0, 1}}, {"a", "b"}, opts); }) == Errc::InvalidParameters);
  opts.n_base = 64;
  CHECK(code_of([&] { sobol_indices(f, {{0, 1}}, {"a"}, opts); }) == Errc::InvalidParameters);
  const ScalarModel flat = [](std::span<const double>) { return 2.0; };
  CHECK(code_of([&] { sobol_indices(flat, {{0, 1}, {0, 1}}, {"a", "b"}, opts); }) == Errc::DegenerateVariance);
}

TEST_CASE("risk frontier") {
  SimScenario sc = quick_scenario();
  const std::vector<double> temps{kZeroCelsius + 25.0, kZeroCelsius - 10.0};
  const std::vector<double> ws{1.0, 1.5};
  CHECK(risk_frontier(sc, temps, ws, 0.0, 40).empty());

  const auto huge = risk_frontier(sc, temps, ws, 1e9, 40);
  for (const auto& c : huge.cells) CHECK(c.violates);
  for (const auto& p : huge.columns) CHECK(p.status == FrontierPoint::Status::AllBelow);

  const auto base = risk_frontier(sc, temps, ws, 0.0, 40);
  std::vector<double> levels;
  for (const auto& c : base.cells) levels.push_back(c.t05);
  std::sort(levels.begin(), levels.end());
  std::vector<bool> prev(base.cells.size(), false);
  for (double t_min : levels) {
    const auto fr = risk_frontier(sc, temps, ws, t_min + 1.0, 40);
    for (std::size_t k = 0; k < fr.cells.size(); ++k) {
      CHECK(fr.cells[k].t05 == base.cells[k].t05);
      CHECK((!prev[k] || fr.cells[k].violates));  // violating set only grows
      prev[k] = fr.cells[k].violates;
    }
    // the cold column violates wherever the warm one does
    for (std::size_t b = 0; b < ws.size(); ++b) {
      if (fr.cells[b].violates) CHECK(fr.cells[ws.size() + b].violates);
    }
    const auto& warm = fr.columns[0];
    const auto& cold = fr.columns[1];
    if (warm.status == FrontierPoint::Status::Crossing && cold.status == FrontierPoint::Status::Crossing) {
      CHECK(cold.rho_ws <= warm.rho_ws);
    }
  }
}

TEST_CASE("usage perturbations") {
  const auto spec = default_ctmc();
  CHECK(scale_dwell(spec, 1.0) == spec);
  CHECK(scale_dwell(spec, 0.8).dwell_minutes[0] == doctest::Approx(14.4));
  const auto biased = bias_high_power(spec, default_modes(), 0.10);
  for (std::size_t i = 0; i < biased.size(); ++i) {
    const double sum = std::accumulate(biased.transition_mix[i].begin(), biased.transition_mix[i].end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(biased.transition_mix[i][i] == 0.0);
  }
  // Idle row: Video/Gaming/WeakSignal carry 0.55 and gain 0.10 before renormalising
  CHECK(biased.transition_mix[0][1] == doctest::Approx(0.45 / 1.10).epsilon(1e-12));
  CHECK(biased.transition_mix[0][2] == doctest::Approx((0.30 + 0.10 * 0.30 / 0.55) / 1.10).epsilon(1e-12));

  const auto rows = usage_perturbation_study(quick_scenario(), 30);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].variant == "baseline");
  CHECK(rows[0].d_mean_pct == 0.0);
  CHECK(rows[0].d_t05_pct == 0.0);

  SimScenario same = quick_scenario();
  same.usage.ctmc = scale_dwell(same.usage.ctmc, 1.0);
  const auto a = run_monte_carlo(quick_scenario(), 20);
  const auto b = run_monte_carlo(same, 20);
  CHECK(a.samples == b.samples);
}

TEST_CASE("validation metrics") {
  const TimeSeries ref{{0, 10, 20, 30}, {4.0, 3.9, 3.8, 3.7}};
  const auto self = validation_metrics(ref, ref, 30.0, 30.0);
  CHECK(self.mape == 0.0);
  CHECK(self.delta_tau == 0.0);
  CHECK(self.n_points == 4);

  const TimeSeries flat{{0, 10, 20, 30}, {4.0, 4.0, 4.0, 4.0}};
  const TimeSeries shifted{{0, 10, 20, 30}, {4.1, 4.1, 4.1, 4.1}};
  CHECK(validation_metrics(shifted, flat, 30.0, 25.0).mape == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(validation_metrics(shifted, flat, 30.0, 25.0).delta_tau == 5.0);

  // interpolation onto reference times
  const TimeSeries coarse{{0, 20}, {4.0, 3.8}};
  CHECK(validation_metrics(coarse, TimeSeries{{0, 10}, {4.0, 3.9}}, 0, 0).mape == doctest::Approx(0.0).epsilon(1e-12));

  const TimeSeries later{{100, 200}, {4.0, 3.9}};
  CHECK(code_of([&] { validation_metrics(ref, later, 0, 0); }) == Errc::NoOverlap);
}

TEST_CASE("paired bootstrap") {
  std::vector<double> a(200), b(200);
  std::iota(a.begin(), a.end(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) b[k] = a[k] + 1.0;
  const auto same = paired_bootstrap_ci(a, a, sample_mean);
  CHECK(same.lo == 0.0);
  CHECK(same.hi == 0.0);
  const auto shift = paired_bootstrap_ci(a, b, sample_mean);
  CHECK(shift.lo == doctest::Approx(1.0));
  CHECK(shift.hi == doctest::Approx(1.0));
}
