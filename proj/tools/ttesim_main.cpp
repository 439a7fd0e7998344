// Command-line front end: one subcommand per experiment family. Every command
// reads the same JSON config, writes CSV tables plus summary.json into the
// output directory, and exits 0 / 2 (config) / 3 (runtime) / 4 (I/O).

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttesim/analysis.hpp"
#include "ttesim/config.hpp"
#include "ttesim/control.hpp"
#include "ttesim/identification.hpp"
#include "ttesim/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ttesim;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kRuntimeError = 3, kIoError = 4 };

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// CSV writer with fixed 9-significant-digit formatting.
class CsvFile {
 public:
  CsvFile(const fs::path& path, std::initializer_list<const char*> header) : path_(path), out_(path) {
    if (!out_) throw Error(Errc::IoError, "cannot write " + path.string());
    bool first = true;
    for (const char* h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
    if (!out_) throw Error(Errc::IoError, "failed writing " + path_.string());
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  static std::string cell(std::size_t n) { return std::to_string(n); }

  fs::path path_;
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

json distribution_summary(const TteDistribution& d) {
  json q = json::object();
  for (const auto& [level, t] : d.quantiles) q[fmt(level)] = t;
  return {{"runs", d.runs.size()},
          {"uncensored", d.samples.size()},
          {"faults", d.faults},
          {"censored_fraction", d.censored_fraction},
          {"mean_tte_s", d.mean},
          {"t05_s", d.quantile(0.05)},
          {"quantiles_s", q}};
}

struct Context {
  RunConfig cfg;
  fs::path out;
};

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto dist = run_monte_carlo(c.scenario, c.runs, c.workers);
  {
    CsvFile f(ctx.out / "tte_samples.csv", {"run_index", "tte_s", "cause", "censored"});
    for (const auto& r : dist.runs) {
      f.row(r.run_index, r.fault ? std::nan("") : r.tte,
            r.fault ? std::string("fault") : std::string(cause_name(r.cause)), r.censored);
    }
  }
  {
    CsvFile f(ctx.out / "survival.csv", {"t_s", "s_of_t"});
    for (const auto& [t, s] : dist.survival) f.row(t, s);
  }
  {
    CsvFile f(ctx.out / "soc_envelope.csv", {"t_s", "soc_p05", "soc_p50", "soc_p95", "survivors"});
    for (const auto& e : dist.soc_envelope) f.row(e.t, e.p05, e.p50, e.p95, e.survivors);
  }
  json s = distribution_summary(dist);
  s["command"] = "simulate";
  s["seed"] = c.scenario.seed;
  double max_charge_error = 0.0;
  for (const auto& r : dist.runs) max_charge_error = std::max(max_charge_error, r.charge_error);
  s["max_charge_error"] = max_charge_error;
  write_json(ctx.out / "summary.json", s);
  std::printf("mean TTE %.3f h, t05 %.3f h, censored %.1f%%\n", dist.mean / 3600.0,
              dist.quantile(0.05) / 3600.0, 100.0 * dist.censored_fraction);
  return kOk;
}

int cmd_scenario(Context& ctx) {
  const auto& c = ctx.cfg;
  CsvFile table(ctx.out / "scenario_a.csv", {"t_env_k", "tte_s", "z_end", "cause", "censored"});
  CsvFile traces(ctx.out / "scenario_a_traces.csv", {"t_env_k", "t_s", "soc", "v_term", "t_core_k", "current_a"});
  json rows = json::array();
  for (double t_env : c.scenario_a.t_env) {
    SimScenario sc = c.scenario;
    sc.t_env = t_env;
    sc.initial.t_core = t_env;
    sc.load_profile = LoadProfile::constant_power(c.scenario_a.p_req);
    sc.throttle.reset();
    RngStream rng(sc.seed, 0);
    const auto tr = run_trajectory(sc, rng, {true});
    table.row(t_env, tr.tte, tr.z_end, cause_name(tr.cause), tr.censored);
    double next = 0.0;
    for (const auto& p : tr.series) {
      if (p.t + 1e-9 < next) continue;
      traces.row(t_env, p.t, p.z, p.v_term, p.t_core, p.current);
      next += kEnvelopeGrid;
    }
    rows.push_back({{"t_env_k", t_env}, {"tte_s", tr.tte}, {"z_end", tr.z_end},
                    {"cause", std::string(cause_name(tr.cause))}});
    std::printf("T_env %7.2f K: TTE %.3f h, z_end %.4f (%s)\n", t_env, tr.tte / 3600.0, tr.z_end,
                std::string(cause_name(tr.cause)).c_str());
  }
  write_json(ctx.out / "summary.json", {{"command", "scenario"}, {"p_req_w", c.scenario_a.p_req}, {"runs", rows}});
  return kOk;
}

double q05(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  return empirical_quantile(v, 0.05);
}

int cmd_ablate(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto rows = run_ablation_suite(c.scenario, c.runs, c.workers);
  const auto base = rows.front().dist.paired_values();
  CsvFile f(ctx.out / "ablation.csv",
            {"variant", "mean_tte_s", "t05_s", "d_t05_s", "d_t05_ci_lo_s", "d_t05_ci_hi_s", "censored_fraction"});
  json out = json::array();
  for (const auto& r : rows) {
    const auto pv = r.dist.paired_values();
    const auto ci = paired_bootstrap_ci(base, pv, q05, 1000, 0.95, c.scenario.seed);
    f.row(r.variant, r.mean_tte, r.t05, r.t05 - rows.front().t05, ci.lo, ci.hi, r.dist.censored_fraction);
    out.push_back({{"variant", r.variant}, {"mean_tte_s", r.mean_tte}, {"t05_s", r.t05},
                   {"d_t05_ci_s", {ci.lo, ci.hi}}});
    std::printf("%-16s mean %.3f h  t05 %.3f h\n", r.variant.c_str(), r.mean_tte / 3600.0, r.t05 / 3600.0);
  }
  write_json(ctx.out / "summary.json", {{"command", "ablate"}, {"seed", c.scenario.seed}, {"variants", out}});
  return kOk;
}

int cmd_throttle(Context& ctx) {
  const auto& c = ctx.cfg;
  SimScenario base = c.scenario;
  base.throttle.reset();
  const auto off = run_monte_carlo(base, c.runs, c.workers);
  const auto on = evaluate_policy(base, c.policy, c.runs, c.throttle.t_min, c.throttle.epsilon, c.workers);
  const auto ci = paired_bootstrap_ci(off.paired_values(), on.tte.paired_values(), q05, 1000, 0.95,
                                      c.scenario.seed);

  double j_off = 0.0, viol_off = 0.0;
  std::size_t n_off = 0;
  for (const auto& r : off.runs) {
    if (r.fault) continue;
    ++n_off;
    j_off += r.tte;  // u = 1 throughout
    if (!r.censored && r.tte < c.throttle.t_min) viol_off += 1.0;
  }
  j_off /= static_cast<double>(n_off);
  viol_off /= static_cast<double>(n_off);
  {
    CsvFile f(ctx.out / "throttle.csv", {"policy", "j_mean_s", "mean_tte_s", "t05_s", "p_violation", "constraint_ok"});
    f.row("baseline", j_off, off.mean, off.quantile(0.05), viol_off, viol_off <= c.throttle.epsilon);
    f.row("throttled", on.j_mean, on.tte.mean, on.tte.quantile(0.05), on.p_violation, on.constraint_ok);
  }
  const auto pareto = pareto_sweep(base, c.policy, c.throttle.kappa_grid, c.runs, c.workers);
  {
    CsvFile f(ctx.out / "pareto.csv", {"kappa", "j_mean_s", "t05_s"});
    for (const auto& p : pareto) f.row(p.kappa, p.j_mean, p.t05);
  }
  write_json(ctx.out / "summary.json",
             {{"command", "throttle"},
              {"seed", c.scenario.seed},
              {"baseline", {{"j_mean_s", j_off}, {"t05_s", off.quantile(0.05)}, {"p_violation", viol_off}}},
              {"throttled",
               {{"kappa", c.policy.kappa},
                {"j_mean_s", on.j_mean},
                {"t05_s", on.tte.quantile(0.05)},
                {"p_violation", on.p_violation},
                {"constraint_ok", on.constraint_ok},
                {"floor_fraction", on.floor_fraction}}},
              {"d_t05_ci_s", {ci.lo, ci.hi}}});
  std::printf("baseline t05 %.3f h, throttled t05 %.3f h (CI of difference [%.3f, %.3f] h)\n",
              off.quantile(0.05) / 3600.0, on.tte.quantile(0.05) / 3600.0, ci.lo / 3600.0, ci.hi / 3600.0);
  return kOk;
}

int cmd_sobol(Context& ctx) {
  const auto& c = ctx.cfg;
  SobolOptions opts;
  opts.n_base = c.sobol.n_base;
  opts.n_bootstrap = c.sobol.n_bootstrap;
  opts.workers = c.workers;
  const auto res = sobol_indices(c.scenario, c.sobol.inputs, c.sobol.inner_runs, c.sobol.output, opts);
  CsvFile f(ctx.out / "sobol.csv", {"input", "s1", "s1_lo", "s1_hi", "st", "st_lo", "st_hi"});
  json idx = json::array();
  for (const auto& i : res.indices) {
    f.row(i.name, i.s1, i.s1_lo, i.s1_hi, i.st, i.st_lo, i.st_hi);
    idx.push_back({{"input", i.name}, {"s1", i.s1}, {"st", i.st}});
    std::printf("%-8s S1 %7.3f  ST %7.3f\n", i.name.c_str(), i.s1, i.st);
  }
  write_json(ctx.out / "summary.json", {{"command", "sobol"},
                                        {"seed", c.scenario.seed},
                                        {"n_base", res.n_base},
                                        {"inner_runs", c.sobol.inner_runs},
                                        {"output", std::string(statistic_name(c.sobol.output))},
                                        {"evaluations", res.evaluations},
                                        {"variance", res.variance},
                                        {"indices", idx}});
  return kOk;
}

int cmd_elasticity(Context& ctx) {
  const auto& c = ctx.cfg;
  CsvFile f(ctx.out / "elasticity.csv", {"input", "base_value", "base_output_s", "plus_output_s", "elasticity"});
  json rows = json::array();
  for (auto p : c.elasticity.inputs) {
    const auto e = local_elasticity(c.scenario, p, c.elasticity.delta_frac, c.runs, c.elasticity.output, c.workers);
    f.row(param_name(p), e.base_value, e.base_output, e.plus_output, e.elasticity);
    rows.push_back({{"input", std::string(param_name(p))}, {"elasticity", e.elasticity}});
    std::printf("%-8s SI %+.4f\n", std::string(param_name(p)).c_str(), e.elasticity);
  }
  write_json(ctx.out / "summary.json", {{"command", "elasticity"},
                                        {"seed", c.scenario.seed},
                                        {"delta_frac", c.elasticity.delta_frac},
                                        {"output", std::string(statistic_name(c.elasticity.output))},
                                        {"inputs", rows}});
  return kOk;
}

int cmd_frontier(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto fr = risk_frontier(c.scenario, c.frontier.t_env, c.frontier.rho_ws, c.frontier.t_min, c.runs, c.workers);
  {
    CsvFile f(ctx.out / "frontier_grid.csv", {"t_env_k", "rho_ws", "t05_s", "violates"});
    for (const auto& cell : fr.cells) f.row(cell.t_env, cell.rho_ws, cell.t05, cell.violates);
  }
  CsvFile f(ctx.out / "frontier.csv", {"t_env_k", "status", "rho_ws_crossing"});
  json cols = json::array();
  for (const auto& p : fr.columns) {
    const char* status = p.status == FrontierPoint::Status::Crossing    ? "crossing"
                         : p.status == FrontierPoint::Status::Unbounded ? "unbounded"
                                                                        : "all_below";
    f.row(p.t_env, status, p.status == FrontierPoint::Status::Unbounded ? std::nan("") : p.rho_ws);
    cols.push_back({{"t_env_k", p.t_env}, {"status", status}, {"rho_ws", p.rho_ws}});
  }
  write_json(ctx.out / "summary.json", {{"command", "frontier"},
                                        {"seed", c.scenario.seed},
                                        {"t_min_s", c.frontier.t_min},
                                        {"empty", fr.empty()},
                                        {"columns", cols}});
  return kOk;
}

int cmd_perturb(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto rows = usage_perturbation_study(c.scenario, c.runs, c.workers);
  CsvFile f(ctx.out / "perturb.csv", {"variant", "mean_tte_s", "d_mean_pct", "t05_s", "d_t05_pct"});
  json out = json::array();
  for (const auto& r : rows) {
    f.row(r.variant, r.mean, r.d_mean_pct, r.t05, r.d_t05_pct);
    out.push_back({{"variant", r.variant}, {"mean_tte_s", r.mean}, {"d_mean_pct", r.d_mean_pct},
                   {"t05_s", r.t05}, {"d_t05_pct", r.d_t05_pct}});
    std::printf("%-16s mean %.3f h (%+.2f%%)  t05 %.3f h (%+.2f%%)\n", r.variant.c_str(), r.mean / 3600.0,
                r.d_mean_pct, r.t05 / 3600.0, r.d_t05_pct);
  }
  write_json(ctx.out / "summary.json", {{"command", "perturb"}, {"seed", c.scenario.seed}, {"variants", out}});
  return kOk;
}

int cmd_identify(Context& ctx, const std::string& data_override) {
  const auto& c = ctx.cfg;
  const std::string data = data_override.empty() ? c.identify.data : data_override;
  if (data.empty()) {
    throw Error(Errc::ValidationError, "experiments.identify.data: no input CSV given (use --data)");
  }
  const auto records = ingest_cycles(data, c.identify.discharge_negative);
  IdentifyOptions opts{c.identify.q_max, c.identify.i_threshold, c.identify.z_start};
  const auto id = identify(records, opts);
  const BatteryParams params = apply_identified(c.scenario.battery, id);
  params.validate();
  write_json(ctx.out / "identified_params.json", {{"battery", serialize_battery(params)}});
  write_json(ctx.out / "summary.json", {{"command", "identify"},
                                        {"records", records.size()},
                                        {"r0", id.r0},
                                        {"r_p", id.r_p},
                                        {"c_p", id.c_p},
                                        {"tau_p", id.tau_p},
                                        {"relaxation_rmse_v", id.relaxation_rmse},
                                        {"ocv_knots", id.ocv_soc.size()},
                                        {"warnings", id.warnings}});
  for (const auto& w : id.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("R0 %.6f Ohm, Rp %.6f Ohm, Cp %.2f F, tau %.2f s, %zu OCV knots\n", id.r0, id.r_p, id.c_p,
              id.tau_p, id.ocv_soc.size());
  return kOk;
}

int cmd_validate(Context& ctx, const std::string& ref_override, std::optional<double> tte_override) {
  const auto& c = ctx.cfg;
  const std::string path = ref_override.empty() ? c.validate.reference : ref_override;
  if (path.empty()) {
    throw Error(Errc::ValidationError, "experiments.validate.reference: no reference trace given (use --reference)");
  }
  const ReferenceTrace ref = read_reference_trace(path, c.validate.discharge_negative);
  SimScenario sc = c.scenario;
  if (!ref.current.empty()) sc.load_profile = current_profile(ref);
  RngStream rng(sc.seed, 0);
  const auto tr = run_trajectory(sc, rng, {true});
  const TimeSeries pred = voltage_series(tr);
  const double tau_ref = tte_override ? *tte_override
                         : c.validate.reference_tte ? *c.validate.reference_tte
                                                    : ref.trace.t.back();
  const auto rep = validation_metrics(pred, ref.trace, tr.tte, tau_ref);
  {
    CsvFile f(ctx.out / "predicted_trace.csv", {"time_s", "voltage_v"});
    for (std::size_t k = 0; k < pred.t.size(); ++k) f.row(pred.t[k], pred.v[k]);
  }
  write_json(ctx.out / "summary.json", {{"command", "validate"},
                                        {"mape_pct", rep.mape},
                                        {"delta_tau_s", rep.delta_tau},
                                        {"n_points", rep.n_points},
                                        {"tte_predicted_s", tr.tte},
                                        {"tte_reference_s", tau_ref}});
  std::printf("MAPE %.4f%%, delta tau %.1f s over %zu points\n", rep.mape, rep.delta_tau, rep.n_points);
  return kOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::ValidationError:
      return kConfigError;
    case Errc::IoError:
    case Errc::SchemaError:
    case Errc::NonMonotoneTime:
      return kIoError;
    default:
      return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic time-to-empty simulator for smartphone batteries"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<unsigned> workers;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON configuration file (defaults when omitted)");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--runs", runs, "Monte Carlo replications (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string data_path;
  std::string reference_path;
  std::optional<double> reference_tte;
  bool discharge_negative = false;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo time-to-empty distribution");
  auto* scenario = app.add_subcommand("scenario", "Deterministic constant-power sweep over ambient temperature");
  auto* ablate = app.add_subcommand("ablate", "Full model versus isothermal / no_burst / no_polarization");
  auto* throttle = app.add_subcommand("throttle", "Throttling policy evaluation and kappa sweep");
  auto* sobol = app.add_subcommand("sobol", "Variance-based sensitivity indices");
  auto* elasticity = app.add_subcommand("elasticity", "Local elasticities with common random numbers");
  auto* frontier = app.add_subcommand("frontier", "Risk frontier over (T_env, rho_ws)");
  auto* perturb = app.add_subcommand("perturb", "Usage-structure perturbation study");
  auto* ident = app.add_subcommand("identify", "Identify cell parameters from pulse/rest data");
  ident->add_option("--data", data_path, "Cycle CSV (time_s, voltage_v, current_a, cycle_id, cell_id)");
  ident->add_flag("--discharge-negative", discharge_negative, "Discharge current is logged as negative");
  auto* validate = app.add_subcommand("validate", "Compare a predicted trace with a reference trace");
  validate->add_option("--reference", reference_path, "Reference CSV (time_s, voltage_v[, current_a])");
  validate->add_option("--reference-tte", reference_tte, "Reference shutdown time in seconds");
  validate->add_flag("--discharge-negative", discharge_negative, "Discharge current is logged as negative");
  auto* show = app.add_subcommand("config", "Print the resolved configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  Context ctx;
  try {
    ctx.cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) ctx.cfg.scenario.seed = *seed;
    if (runs) ctx.cfg.runs = *runs;
    if (workers) ctx.cfg.workers = *workers;
    if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
    if (discharge_negative) {
      ctx.cfg.identify.discharge_negative = true;
      ctx.cfg.validate.discharge_negative = true;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }

  if (show->parsed()) {
    std::cout << serialize_config(ctx.cfg).dump(2) << '\n';
    return kOk;
  }

  try {
    ctx.out = ctx.cfg.output_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw Error(Errc::IoError, "cannot create output directory " + ctx.out.string() + ": " + ec.message());

    if (simulate->parsed()) return cmd_simulate(ctx);
    if (scenario->parsed()) return cmd_scenario(ctx);
    if (ablate->parsed()) return cmd_ablate(ctx);
    if (throttle->parsed()) return cmd_throttle(ctx);
    if (sobol->parsed()) return cmd_sobol(ctx);
    if (elasticity->parsed()) return cmd_elasticity(ctx);
    if (frontier->parsed()) return cmd_frontier(ctx);
    if (perturb->parsed()) return cmd_perturb(ctx);
    if (ident->parsed()) return cmd_identify(ctx, data_path);
    if (validate->parsed()) return cmd_validate(ctx, reference_path, reference_tte);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}
