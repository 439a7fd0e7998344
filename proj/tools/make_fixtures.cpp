// Regenerates the bundled data fixtures from the model itself:
//   pulse_cycles.csv    three synthetic identification cycles
//   reference_trace.csv a model voltage trace under a stepped current profile
// Usage: make_fixtures <output-dir>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ttesim/analysis.hpp"
#include "ttesim/identification.hpp"

using namespace ttesim;

namespace {

/// Current schedule shared by the reference fixture and its tests: 1 A with
/// 2 A bursts, sampled every 10 s, at 25 C.
SimScenario reference_scenario() {
  SimScenario sc;
  sc.t_env = kZeroCelsius + 25.0;
  sc.initial = {1.0, 0.0, sc.t_env};
  sc.load_profile.kind = LoadProfile::Kind::Current;
  for (int k = 0; k < 3 * 360; ++k) {
    sc.load_profile.t_start.push_back(10.0 * k);
    sc.load_profile.value.push_back((k / 30) % 4 == 3 ? 2.0 : 1.0);
  }
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <output-dir>\n", argv[0]);
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const BatteryParams params = nominal_battery_params();
  const double t_ref = params.t_ref;

  std::vector<CyclePulseRecord> cycles;
  auto pulse = synthesize_record(params, {1.0, 0.0, t_ref}, t_ref, {{60, 0.0}, {900, 2.0}, {900, 0.0}}, 1.0);
  pulse.cycle_id = "1";
  cycles.push_back(pulse);
  pulse = synthesize_record(params, {0.8, 0.0, t_ref}, t_ref, {{60, 0.0}, {600, 1.0}, {900, 0.0}}, 1.0);
  pulse.cycle_id = "2";
  cycles.push_back(pulse);
  auto slow = synthesize_record(params, {1.0, 0.0, t_ref}, t_ref, {{60, 0.0}, {39.0 * 3600.0, 0.05}}, 60.0);
  slow.cycle_id = "3";
  cycles.push_back(slow);
  for (auto& c : cycles) c.cell_id = "SYN01";
  write_cycles_csv(dir / "pulse_cycles.csv", cycles);

  const SimScenario sc = reference_scenario();
  RngStream rng(sc.seed, 0);
  const Trajectory tr = run_trajectory(sc, rng, {true});
  ReferenceTrace ref;
  ref.trace.t.push_back(0.0);
  ref.trace.v.push_back(params.ocv(1.0) - sc.load_profile.value.front() * params.r_ref);
  ref.current.push_back(sc.load_profile.value.front());
  for (const auto& p : tr.series) {
    if (p.t > tr.tte) break;
    const bool on_grid = std::fmod(p.t, 10.0) == 0.0;
    if (!on_grid && p.t != tr.tte) continue;
    const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(p.t / 10.0),
                                                  sc.load_profile.value.size() - 1);
    ref.trace.t.push_back(p.t);
    ref.trace.v.push_back(p.v_term);
    ref.current.push_back(sc.load_profile.value[seg]);
  }
  write_reference_trace(dir / "reference_trace.csv", ref);
  std::printf("reference trace: %zu points, shutdown at %.1f s (%s)\n", ref.trace.t.size(), tr.tte,
              std::string(cause_name(tr.cause)).c_str());
  return 0;
}
