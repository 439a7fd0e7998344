#include "ttesim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ttesim {

using nlohmann::json;

bool operator==(const SimScenario& a, const SimScenario& b) {
  // rate_scaling is code, not data, and is not part of the comparison
  return a.battery == b.battery && a.aging == b.aging && a.usage.modes == b.usage.modes &&
         a.usage.ctmc == b.usage.ctmc && a.usage.multipliers == b.usage.multipliers &&
         a.t_env == b.t_env && a.initial == b.initial && a.horizon == b.horizon &&
         a.initial_mode == b.initial_mode && a.throttle == b.throttle && a.ablation == b.ablation &&
         a.seed == b.seed && a.load_profile == b.load_profile;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.scenario == b.scenario && a.runs == b.runs && a.workers == b.workers &&
         a.output_dir == b.output_dir && a.policy == b.policy && a.scenario_a == b.scenario_a &&
         a.throttle == b.throttle && a.sobol == b.sobol && a.elasticity == b.elasticity &&
         a.frontier == b.frontier && a.identify == b.identify && a.validate == b.validate;
}

namespace {

/// Walks a JSON tree, filling defaults-initialised structs and collecting
/// every problem with its dotted path instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  /// Returns false (and records an error) unless `j` is an object; flags keys
  /// outside `allowed`.
  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
      if (!ok.count(key)) fail(join(path, key), "unknown key");
    }
    return true;
  }

  void number(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) return fail(join(path, key), "expected a number");
    out = v.get<double>();
  }

  void optional_number(const json& j, const std::string& path, const char* key,
                       std::optional<double>& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number()) return fail(join(path, key), "expected a number or null");
    out = v.get<double>();
  }

  template <typename U>
  void count(const json& j, const std::string& path, const char* key, U& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) return fail(join(path, key), "expected a non-negative integer");
    out = static_cast<U>(v.get<std::uint64_t>());
  }

  void boolean(const json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_boolean()) return fail(join(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_string()) return fail(join(path, key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const json& j, const std::string& path, const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    numbers_at(j.at(key), join(path, key), out);
  }

  bool numbers_at(const json& v, const std::string& path, std::vector<double>& out) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return false;
    }
    std::vector<double> tmp;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) {
        fail(path + "[" + std::to_string(k) + "]", "expected a number");
        return false;
      }
      tmp.push_back(v[k].get<double>());
    }
    out = std::move(tmp);
    return true;
  }

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

void read_battery(Reader& r, const json& j, BatteryParams& b) {
  const std::string p = "battery";
  if (!r.object(j, p, {"q_max", "r_ref", "r_p", "c_p", "tau_p", "e_a", "r_gas", "t_ref_k", "m_c_th",
                       "h_a", "eta", "v_cut", "dt_persist_s", "ocv", "du_dT"})) {
    return;
  }
  r.number(j, p, "q_max", b.q_max);
  r.number(j, p, "r_ref", b.r_ref);
  r.number(j, p, "r_p", b.r_p);
  r.number(j, p, "c_p", b.c_p);
  r.number(j, p, "e_a", b.e_a);
  r.number(j, p, "r_gas", b.r_gas);
  r.number(j, p, "t_ref_k", b.t_ref);
  r.number(j, p, "m_c_th", b.m_c_th);
  r.number(j, p, "h_a", b.h_a);
  r.number(j, p, "eta", b.eta);
  r.number(j, p, "v_cut", b.v_cut);
  r.number(j, p, "dt_persist_s", b.dt_persist);
  // the time constant follows the RC pair unless stated explicitly
  b.tau_p = b.r_p * b.c_p;
  r.number(j, p, "tau_p", b.tau_p);

  if (j.contains("ocv")) {
    const auto& o = j.at("ocv");
    if (r.object(o, p + ".ocv", {"soc", "volts"})) {
      std::vector<double> soc = b.ocv.knots_x(), volts = b.ocv.knots_y();
      r.numbers(o, p + ".ocv", "soc", soc);
      r.numbers(o, p + ".ocv", "volts", volts);
      try {
        b.ocv = MonotoneInterpolant(soc, volts);
      } catch (const Error& e) {
        r.fail(p + ".ocv", e.what());
      }
    }
  }
  if (j.contains("du_dT")) {
    const auto& d = j.at("du_dT");
    if (r.object(d, p + ".du_dT", {"soc_breaks", "values"})) {
      r.numbers(d, p + ".du_dT", "soc_breaks", b.du_dT.soc_breaks);
      r.numbers(d, p + ".du_dT", "values", b.du_dT.values);
    }
  }
}

void read_aging(Reader& r, const json& j, std::optional<AgingParams>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  const std::string p = "aging";
  if (!r.object(j, p, {"r_fresh", "q_design", "k_aging", "beta_fade", "n_cycles"})) return;
  AgingParams a;
  r.number(j, p, "r_fresh", a.r_fresh);
  r.number(j, p, "q_design", a.q_design);
  r.number(j, p, "k_aging", a.k_aging);
  r.number(j, p, "beta_fade", a.beta_fade);
  r.number(j, p, "n_cycles", a.n_cycles);
  out = a;
}

void read_usage(Reader& r, const json& j, UsageModel& u) {
  const std::string p = "usage";
  if (!r.object(j, p, {"modes", "dwell_min", "transition_mix", "multipliers"})) return;
  if (j.contains("modes")) {
    const auto& ms = j.at("modes");
    if (!ms.is_array()) {
      r.fail(p + ".modes", "expected an array");
    } else {
      std::vector<ModeSpec> modes;
      for (std::size_t k = 0; k < ms.size(); ++k) {
        const std::string mp = p + ".modes[" + std::to_string(k) + "]";
        ModeSpec m;
        if (!r.object(ms[k], mp, {"name", "mu_w", "sigma_w", "f_scr", "f_cpu", "f_net", "f_bg", "p_cap_w"})) {
          continue;
        }
        r.string(ms[k], mp, "name", m.name);
        r.number(ms[k], mp, "mu_w", m.mu_p);
        r.number(ms[k], mp, "sigma_w", m.sigma_p);
        r.number(ms[k], mp, "f_scr", m.f_scr);
        r.number(ms[k], mp, "f_cpu", m.f_cpu);
        r.number(ms[k], mp, "f_net", m.f_net);
        r.number(ms[k], mp, "f_bg", m.f_bg);
        m.p_cap = m.mu_p + 5.0 * m.sigma_p;
        r.number(ms[k], mp, "p_cap_w", m.p_cap);
        modes.push_back(m);
      }
      u.modes = std::move(modes);
    }
  }
  r.numbers(j, p, "dwell_min", u.ctmc.dwell_minutes);
  if (j.contains("transition_mix")) {
    const auto& tm = j.at("transition_mix");
    if (!tm.is_array()) {
      r.fail(p + ".transition_mix", "expected an array of rows");
    } else {
      std::vector<std::vector<double>> rows(tm.size());
      bool ok = true;
      for (std::size_t k = 0; k < tm.size(); ++k) {
        ok = r.numbers_at(tm[k], p + ".transition_mix[" + std::to_string(k) + "]", rows[k]) && ok;
      }
      if (ok) u.ctmc.transition_mix = std::move(rows);
    }
  }
  if (j.contains("multipliers")) {
    const auto& m = j.at("multipliers");
    const std::string mp = p + ".multipliers";
    if (r.object(m, mp, {"rho_b", "rho_bg", "rho_ws"})) {
      r.number(m, mp, "rho_b", u.multipliers.rho_b);
      r.number(m, mp, "rho_bg", u.multipliers.rho_bg);
      r.number(m, mp, "rho_ws", u.multipliers.rho_ws);
    }
  }
}

void read_scenario(Reader& r, const json& j, SimScenario& s) {
  const std::string p = "scenario";
  if (!r.object(j, p, {"t_env_k", "horizon_s", "initial_mode", "initial", "ablation", "load_profile"})) {
    return;
  }
  r.number(j, p, "t_env_k", s.t_env);
  // the cell starts at ambient unless the initial block says otherwise
  s.initial.t_core = s.t_env;
  r.number(j, p, "horizon_s", s.horizon);
  r.count(j, p, "initial_mode", s.initial_mode);
  if (j.contains("initial")) {
    const auto& i = j.at("initial");
    if (r.object(i, p + ".initial", {"soc", "v_p", "t_core_k"})) {
      r.number(i, p + ".initial", "soc", s.initial.z);
      r.number(i, p + ".initial", "v_p", s.initial.v_p);
      r.number(i, p + ".initial", "t_core_k", s.initial.t_core);
    }
  }
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    if (r.object(a, p + ".ablation", {"isothermal", "no_burst", "no_polarization"})) {
      r.boolean(a, p + ".ablation", "isothermal", s.ablation.isothermal);
      r.boolean(a, p + ".ablation", "no_burst", s.ablation.no_burst);
      r.boolean(a, p + ".ablation", "no_polarization", s.ablation.no_polarization);
    }
  }
  if (j.contains("load_profile")) {
    const auto& lp = j.at("load_profile");
    const std::string lpp = p + ".load_profile";
    if (lp.is_null()) {
      s.load_profile = {};
    } else if (r.object(lp, lpp, {"kind", "t_s", "value"})) {
      std::string kind = "power";
      r.string(lp, lpp, "kind", kind);
      if (kind == "power") {
        s.load_profile.kind = LoadProfile::Kind::Power;
      } else if (kind == "current") {
        s.load_profile.kind = LoadProfile::Kind::Current;
      } else {
        r.fail(lpp + ".kind", "expected \"power\" or \"current\"");
      }
      r.numbers(lp, lpp, "t_s", s.load_profile.t_start);
      r.numbers(lp, lpp, "value", s.load_profile.value);
      if (s.load_profile.t_start.empty()) r.fail(lpp + ".t_s", "must not be empty");
    }
  }
}

void read_statistic(Reader& r, const json& j, const std::string& p, TteStatistic& out) {
  std::string name(statistic_name(out));
  r.string(j, p, "output", name);
  if (const auto s = parse_statistic(name)) {
    out = *s;
  } else {
    r.fail(p + ".output", "expected \"mean\" or \"t05\"");
  }
}

void read_experiments(Reader& r, const json& j, RunConfig& c) {
  const std::string p = "experiments";
  if (!r.object(j, p, {"scenario_a", "throttle", "sobol", "elasticity", "frontier", "identify", "validate"})) {
    return;
  }
  if (j.contains("scenario_a")) {
    const auto& e = j.at("scenario_a");
    const std::string q = p + ".scenario_a";
    if (r.object(e, q, {"p_req_w", "t_env_k"})) {
      r.number(e, q, "p_req_w", c.scenario_a.p_req);
      r.numbers(e, q, "t_env_k", c.scenario_a.t_env);
    }
  }
  if (j.contains("throttle")) {
    const auto& e = j.at("throttle");
    const std::string q = p + ".throttle";
    if (r.object(e, q, {"kappa_grid", "t_min_s", "epsilon"})) {
      r.numbers(e, q, "kappa_grid", c.throttle.kappa_grid);
      r.number(e, q, "t_min_s", c.throttle.t_min);
      r.number(e, q, "epsilon", c.throttle.epsilon);
    }
  }
  if (j.contains("sobol")) {
    const auto& e = j.at("sobol");
    const std::string q = p + ".sobol";
    if (r.object(e, q, {"n_base", "inner_runs", "n_bootstrap", "output", "inputs"})) {
      r.count(e, q, "n_base", c.sobol.n_base);
      r.count(e, q, "inner_runs", c.sobol.inner_runs);
      r.count(e, q, "n_bootstrap", c.sobol.n_bootstrap);
      read_statistic(r, e, q, c.sobol.output);
      if (e.contains("inputs")) {
        const auto& ins = e.at("inputs");
        if (!ins.is_array()) {
          r.fail(q + ".inputs", "expected an array");
        } else {
          std::vector<SensitivityInput> parsed;
          for (std::size_t k = 0; k < ins.size(); ++k) {
            const std::string ip = q + ".inputs[" + std::to_string(k) + "]";
            if (!r.object(ins[k], ip, {"name", "lo", "hi"})) continue;
            std::string name;
            r.string(ins[k], ip, "name", name);
            const auto param = parse_param(name);
            if (!param) {
              r.fail(ip + ".name", "unknown input '" + name + "'");
              continue;
            }
            SensitivityInput in{*param, 0.0, 0.0};
            if (!ins[k].contains("lo") || !ins[k].contains("hi")) {
              r.fail(ip, "needs both lo and hi");
              continue;
            }
            r.number(ins[k], ip, "lo", in.lo);
            r.number(ins[k], ip, "hi", in.hi);
            parsed.push_back(in);
          }
          c.sobol.inputs = std::move(parsed);
        }
      }
    }
  }
  if (j.contains("elasticity")) {
    const auto& e = j.at("elasticity");
    const std::string q = p + ".elasticity";
    if (r.object(e, q, {"delta_frac", "output", "inputs"})) {
      r.number(e, q, "delta_frac", c.elasticity.delta_frac);
      read_statistic(r, e, q, c.elasticity.output);
      if (e.contains("inputs")) {
        const auto& ins = e.at("inputs");
        if (!ins.is_array()) {
          r.fail(q + ".inputs", "expected an array of names");
        } else {
          std::vector<SensitivityParam> parsed;
          for (std::size_t k = 0; k < ins.size(); ++k) {
            const auto param = ins[k].is_string() ? parse_param(ins[k].get<std::string>()) : std::nullopt;
            if (!param) {
              r.fail(q + ".inputs[" + std::to_string(k) + "]", "unknown input");
              continue;
            }
            parsed.push_back(*param);
          }
          c.elasticity.inputs = std::move(parsed);
        }
      }
    }
  }
  if (j.contains("frontier")) {
    const auto& e = j.at("frontier");
    const std::string q = p + ".frontier";
    if (r.object(e, q, {"t_env_k", "rho_ws", "t_min_s"})) {
      r.numbers(e, q, "t_env_k", c.frontier.t_env);
      r.numbers(e, q, "rho_ws", c.frontier.rho_ws);
      r.number(e, q, "t_min_s", c.frontier.t_min);
    }
  }
  if (j.contains("identify")) {
    const auto& e = j.at("identify");
    const std::string q = p + ".identify";
    if (r.object(e, q, {"data", "discharge_negative", "q_max", "i_threshold_a", "z_start"})) {
      r.string(e, q, "data", c.identify.data);
      r.boolean(e, q, "discharge_negative", c.identify.discharge_negative);
      r.number(e, q, "q_max", c.identify.q_max);
      r.number(e, q, "i_threshold_a", c.identify.i_threshold);
      r.number(e, q, "z_start", c.identify.z_start);
    }
  }
  if (j.contains("validate")) {
    const auto& e = j.at("validate");
    const std::string q = p + ".validate";
    if (r.object(e, q, {"reference", "reference_tte_s", "discharge_negative"})) {
      r.string(e, q, "reference", c.validate.reference);
      r.optional_number(e, q, "reference_tte_s", c.validate.reference_tte);
      r.boolean(e, q, "discharge_negative", c.validate.discharge_negative);
    }
  }
}

void check_settings(const RunConfig& c, std::vector<std::string>& out) {
  if (c.runs == 0) out.emplace_back("runs: must be >= 1");
  if (c.workers == 0) out.emplace_back("workers: must be >= 1");
  for (auto& v : c.policy.violations()) out.push_back("throttle." + v);
  if (!(c.scenario_a.p_req >= 0.0)) out.emplace_back("experiments.scenario_a.p_req_w: must be >= 0");
  for (double t : c.scenario_a.t_env) {
    if (!(t > 0.0)) out.emplace_back("experiments.scenario_a.t_env_k: temperatures must be > 0");
  }
  for (double k : c.throttle.kappa_grid) {
    if (!(k > 0.0 && k <= 1.0)) out.emplace_back("experiments.throttle.kappa_grid: values must lie in (0, 1]");
  }
  if (!(c.throttle.epsilon > 0.0 && c.throttle.epsilon < 1.0)) {
    out.emplace_back("experiments.throttle.epsilon: must lie in (0, 1)");
  }
  const auto n = c.sobol.n_base;
  if (n < 64 || (n & (n - 1)) != 0) {
    out.emplace_back("experiments.sobol.n_base: must be a power of two and >= 64");
  }
  if (c.sobol.inner_runs == 0) out.emplace_back("experiments.sobol.inner_runs: must be >= 1");
  if (c.sobol.inputs.size() < 2) out.emplace_back("experiments.sobol.inputs: need at least 2 inputs");
  for (std::size_t k = 0; k < c.sobol.inputs.size(); ++k) {
    if (!(c.sobol.inputs[k].lo < c.sobol.inputs[k].hi)) {
      out.push_back("experiments.sobol.inputs[" + std::to_string(k) + "]: lo must be < hi");
    }
  }
  if (!(c.elasticity.delta_frac > 0.0)) out.emplace_back("experiments.elasticity.delta_frac: must be > 0");
  if (c.frontier.t_env.empty()) out.emplace_back("experiments.frontier.t_env_k: must not be empty");
  if (c.frontier.rho_ws.empty()) out.emplace_back("experiments.frontier.rho_ws: must not be empty");
  if (!(c.identify.q_max > 0.0)) out.emplace_back("experiments.identify.q_max: must be > 0");
  if (!(c.identify.i_threshold > 0.0)) out.emplace_back("experiments.identify.i_threshold_a: must be > 0");
}

json mode_json(const ModeSpec& m) {
  return {{"name", m.name},   {"mu_w", m.mu_p},   {"sigma_w", m.sigma_p}, {"f_scr", m.f_scr},
          {"f_cpu", m.f_cpu}, {"f_net", m.f_net}, {"f_bg", m.f_bg},       {"p_cap_w", m.p_cap}};
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Reader r;
  if (doc.is_null()) return c;
  if (r.object(doc, "", {"seed", "runs", "workers", "output_dir", "battery", "aging", "usage", "scenario",
                         "throttle", "experiments"})) {
    r.count(doc, "", "seed", c.scenario.seed);
    r.count(doc, "", "runs", c.runs);
    r.count(doc, "", "workers", c.workers);
    r.string(doc, "", "output_dir", c.output_dir);
    if (doc.contains("battery")) read_battery(r, doc.at("battery"), c.scenario.battery);
    if (doc.contains("aging")) read_aging(r, doc.at("aging"), c.scenario.aging);
    if (doc.contains("usage")) read_usage(r, doc.at("usage"), c.scenario.usage);
    if (doc.contains("scenario")) read_scenario(r, doc.at("scenario"), c.scenario);
    if (doc.contains("throttle")) {
      const auto& t = doc.at("throttle");
      if (r.object(t, "throttle", {"enabled", "kappa", "z_crit", "t_crit_k", "u_min"})) {
        bool enabled = false;
        r.boolean(t, "throttle", "enabled", enabled);
        r.number(t, "throttle", "kappa", c.policy.kappa);
        r.number(t, "throttle", "z_crit", c.policy.z_crit);
        r.number(t, "throttle", "t_crit_k", c.policy.t_crit);
        r.number(t, "throttle", "u_min", c.policy.u_min);
        if (enabled) c.scenario.throttle = c.policy;
      }
    }
    if (doc.contains("experiments")) read_experiments(r, doc.at("experiments"), c);
  }
  if (r.errors.empty()) {
    for (auto& v : c.scenario.violations()) {
      // the policy block is reported once, below
      if (v.rfind("throttle.", 0) != 0) r.errors.push_back(std::move(v));
    }
    check_settings(c, r.errors);
  }
  if (!r.errors.empty()) {
    std::string msg = std::to_string(r.errors.size()) + " configuration problem(s):";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw Error(Errc::ValidationError, msg);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return RunConfig{};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json serialize_battery(const BatteryParams& b) {
  return {{"q_max", b.q_max},
          {"r_ref", b.r_ref},
          {"r_p", b.r_p},
          {"c_p", b.c_p},
          {"tau_p", b.tau_p},
          {"e_a", b.e_a},
          {"r_gas", b.r_gas},
          {"t_ref_k", b.t_ref},
          {"m_c_th", b.m_c_th},
          {"h_a", b.h_a},
          {"eta", b.eta},
          {"v_cut", b.v_cut},
          {"dt_persist_s", b.dt_persist},
          {"ocv", {{"soc", b.ocv.knots_x()}, {"volts", b.ocv.knots_y()}}},
          {"du_dT", {{"soc_breaks", b.du_dT.soc_breaks}, {"values", b.du_dT.values}}}};
}

json serialize_config(const RunConfig& c) {
  const SimScenario& s = c.scenario;
  json j;
  j["seed"] = s.seed;
  j["runs"] = c.runs;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["battery"] = serialize_battery(s.battery);
  if (s.aging) {
    j["aging"] = {{"r_fresh", s.aging->r_fresh},
                  {"q_design", s.aging->q_design},
                  {"k_aging", s.aging->k_aging},
                  {"beta_fade", s.aging->beta_fade},
                  {"n_cycles", s.aging->n_cycles}};
  } else {
    j["aging"] = nullptr;
  }
  json modes = json::array();
  for (const auto& m : s.usage.modes) modes.push_back(mode_json(m));
  j["usage"] = {{"modes", modes},
                {"dwell_min", s.usage.ctmc.dwell_minutes},
                {"transition_mix", s.usage.ctmc.transition_mix},
                {"multipliers",
                 {{"rho_b", s.usage.multipliers.rho_b},
                  {"rho_bg", s.usage.multipliers.rho_bg},
                  {"rho_ws", s.usage.multipliers.rho_ws}}}};
  json scen = {{"t_env_k", s.t_env},
               {"horizon_s", s.horizon},
               {"initial_mode", s.initial_mode},
               {"initial", {{"soc", s.initial.z}, {"v_p", s.initial.v_p}, {"t_core_k", s.initial.t_core}}},
               {"ablation",
                {{"isothermal", s.ablation.isothermal},
                 {"no_burst", s.ablation.no_burst},
                 {"no_polarization", s.ablation.no_polarization}}}};
  if (s.load_profile.empty()) {
    scen["load_profile"] = nullptr;
  } else {
    scen["load_profile"] = {{"kind", s.load_profile.kind == LoadProfile::Kind::Power ? "power" : "current"},
                            {"t_s", s.load_profile.t_start},
                            {"value", s.load_profile.value}};
  }
  j["scenario"] = scen;
  // an enabled policy is the scenario's; otherwise the stored command policy
  const ThrottlePolicy& pol = s.throttle ? *s.throttle : c.policy;
  j["throttle"] = {{"enabled", s.throttle.has_value()},
                   {"kappa", pol.kappa},
                   {"z_crit", pol.z_crit},
                   {"t_crit_k", pol.t_crit},
                   {"u_min", pol.u_min}};

  json sobol_inputs = json::array();
  for (const auto& in : c.sobol.inputs) {
    sobol_inputs.push_back({{"name", std::string(param_name(in.param))}, {"lo", in.lo}, {"hi", in.hi}});
  }
  json el_inputs = json::array();
  for (auto p : c.elasticity.inputs) el_inputs.push_back(std::string(param_name(p)));
  j["experiments"] = {
      {"scenario_a", {{"p_req_w", c.scenario_a.p_req}, {"t_env_k", c.scenario_a.t_env}}},
      {"throttle",
       {{"kappa_grid", c.throttle.kappa_grid}, {"t_min_s", c.throttle.t_min}, {"epsilon", c.throttle.epsilon}}},
      {"sobol",
       {{"n_base", c.sobol.n_base},
        {"inner_runs", c.sobol.inner_runs},
        {"n_bootstrap", c.sobol.n_bootstrap},
        {"output", std::string(statistic_name(c.sobol.output))},
        {"inputs", sobol_inputs}}},
      {"elasticity",
       {{"delta_frac", c.elasticity.delta_frac},
        {"output", std::string(statistic_name(c.elasticity.output))},
        {"inputs", el_inputs}}},
      {"frontier",
       {{"t_env_k", c.frontier.t_env}, {"rho_ws", c.frontier.rho_ws}, {"t_min_s", c.frontier.t_min}}},
      {"identify",
       {{"data", c.identify.data},
        {"discharge_negative", c.identify.discharge_negative},
        {"q_max", c.identify.q_max},
        {"i_threshold_a", c.identify.i_threshold},
        {"z_start", c.identify.z_start}}},
      {"validate",
       {{"reference", c.validate.reference},
        {"reference_tte_s", c.validate.reference_tte ? json(*c.validate.reference_tte) : json(nullptr)},
        {"discharge_negative", c.validate.discharge_negative}}}};
  return j;
}

}  // namespace ttesim
