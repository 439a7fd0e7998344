#include "ttesim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <boost/random/sobol.hpp>

namespace ttesim {

namespace {

constexpr std::array<std::pair<SensitivityParam, std::string_view>, 8> kParamNames{{
    {SensitivityParam::TEnv, "t_env"},
    {SensitivityParam::QMax, "q_max"},
    {SensitivityParam::RRef, "r_ref"},
    {SensitivityParam::HA, "h_a"},
    {SensitivityParam::Eta, "eta"},
    {SensitivityParam::RhoB, "rho_b"},
    {SensitivityParam::RhoBg, "rho_bg"},
    {SensitivityParam::RhoWs, "rho_ws"},
}};

/// Statistic over per-run values with censored runs held at the horizon, so
/// the output stays defined when some runs outlive it.
double statistic_of(std::vector<double> values, TteStatistic s) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) throw Error(Errc::EmptySamples, "every replication faulted");
  if (s == TteStatistic::Mean) return sample_mean(values);
  return empirical_quantile(values, 0.05);
}

double evaluate_statistic(const SimScenario& sc, std::size_t n_runs, TteStatistic s, unsigned workers) {
  try {
    return tte_statistic(run_monte_carlo(sc, n_runs, workers), s);
  } catch (const Error& e) {
    if (e.code() == Errc::AllRunsCensored) return sc.horizon;
    throw;
  }
}

Interval percentile_interval(std::vector<double> values, double level, double estimate) {
  std::sort(values.begin(), values.end());
  const double alpha = 0.5 * (1.0 - level);
  Interval iv{empirical_quantile(values, std::max(alpha, 1e-12)), empirical_quantile(values, 1.0 - alpha)};
  iv.lo = std::min(iv.lo, estimate);
  iv.hi = std::max(iv.hi, estimate);
  return iv;
}

}  // namespace

std::string_view param_name(SensitivityParam p) noexcept {
  for (const auto& [k, name] : kParamNames) {
    if (k == p) return name;
  }
  return "?";
}

std::optional<SensitivityParam> parse_param(std::string_view name) noexcept {
  for (const auto& [k, n] : kParamNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::vector<SensitivityParam> all_sensitivity_params() {
  std::vector<SensitivityParam> out;
  for (const auto& entry : kParamNames) out.push_back(entry.first);
  return out;
}

double get_param(const SimScenario& sc, SensitivityParam p) {
  switch (p) {
    case SensitivityParam::TEnv: return sc.t_env;
    case SensitivityParam::QMax: return sc.battery.q_max;
    case SensitivityParam::RRef: return sc.battery.r_ref;
    case SensitivityParam::HA: return sc.battery.h_a;
    case SensitivityParam::Eta: return sc.battery.eta;
    case SensitivityParam::RhoB: return sc.usage.multipliers.rho_b;
    case SensitivityParam::RhoBg: return sc.usage.multipliers.rho_bg;
    case SensitivityParam::RhoWs: return sc.usage.multipliers.rho_ws;
  }
  return 0.0;
}

void set_param(SimScenario& sc, SensitivityParam p, double value) {
  switch (p) {
    case SensitivityParam::TEnv:
      sc.t_env = value;
      sc.initial.t_core = value;
      break;
    case SensitivityParam::QMax: sc.battery.q_max = value; break;
    case SensitivityParam::RRef: sc.battery.r_ref = value; break;
    case SensitivityParam::HA: sc.battery.h_a = value; break;
    case SensitivityParam::Eta: sc.battery.eta = value; break;
    case SensitivityParam::RhoB: sc.usage.multipliers.rho_b = value; break;
    case SensitivityParam::RhoBg: sc.usage.multipliers.rho_bg = value; break;
    case SensitivityParam::RhoWs: sc.usage.multipliers.rho_ws = value; break;
  }
}

std::vector<SensitivityInput> default_sensitivity_inputs() {
  return {
      {SensitivityParam::TEnv, kZeroCelsius - 20.0, kZeroCelsius + 25.0},
      {SensitivityParam::QMax, 1.6, 2.1},
      {SensitivityParam::RRef, 0.03, 0.09},
      {SensitivityParam::HA, 0.15, 0.8},
      {SensitivityParam::Eta, 0.85, 0.95},
      {SensitivityParam::RhoB, 0.3, 1.0},
      {SensitivityParam::RhoBg, 0.3, 1.0},
      {SensitivityParam::RhoWs, 1.0, 2.0},
  };
}

std::string_view statistic_name(TteStatistic s) noexcept {
  return s == TteStatistic::Mean ? "mean" : "t05";
}

std::optional<TteStatistic> parse_statistic(std::string_view name) noexcept {
  if (name == "mean") return TteStatistic::Mean;
  if (name == "t05") return TteStatistic::T05;
  return std::nullopt;
}

double tte_statistic(const TteDistribution& d, TteStatistic s) {
  return statistic_of(d.paired_values(), s);
}

double sample_mean(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::EmptySamples, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------

Elasticity local_elasticity(const SimScenario& sc, SensitivityParam p, double delta_frac,
                            std::size_t n_runs, TteStatistic stat, unsigned workers) {
  if (!(delta_frac > 0.0)) throw Error(Errc::InvalidParameters, "delta_frac must be positive");
  Elasticity e;
  e.param = p;
  e.base_value = get_param(sc, p);
  if (e.base_value == 0.0) {
    throw Error(Errc::InvalidParameters, std::string(param_name(p)) + " has a zero base value");
  }
  e.base_output = evaluate_statistic(sc, n_runs, stat, workers);
  SimScenario up = sc;
  set_param(up, p, e.base_value * (1.0 + delta_frac));
  e.plus_output = evaluate_statistic(up, n_runs, stat, workers);
  e.elasticity = ((e.plus_output - e.base_output) / e.base_output) / delta_frac;
  return e;
}

// ---------------------------------------------------------------------------

double ishigami(std::span<const double> x, double a, double b) {
  const double s1 = std::sin(x[0]);
  const double s2 = std::sin(x[1]);
  return s1 + a * s2 * s2 + b * std::pow(x[2], 4) * s1;
}

SobolResult sobol_indices(const ScalarModel& model, const std::vector<std::pair<double, double>>& ranges,
                          const std::vector<std::string>& names, const SobolOptions& opts) {
  const std::size_t d = ranges.size();
  const std::size_t n = opts.n_base;
  if (d < 2) throw Error(Errc::InvalidParameters, "Sobol analysis needs at least 2 inputs");
  if (names.size() != d) throw Error(Errc::InvalidParameters, "one name per input is required");
  if (n < 64 || (n & (n - 1)) != 0) {
    throw Error(Errc::InvalidParameters, "n_base must be a power of two and at least 64");
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (!(ranges[k].first <= ranges[k].second)) {
      throw Error(Errc::InvalidParameters, "range of " + names[k] + " has lo > hi");
    }
  }

  // A and B from the first and second halves of a 2d-dimensional sequence;
  // the all-zero first point is skipped.
  boost::random::sobol gen(2 * d);
  gen.discard(2 * d);
  std::vector<double> a(n * d), b(n * d);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < 2 * d; ++k) {
      const double u = static_cast<double>(gen()) * 0x1.0p-64;
      const double lo = ranges[k % d].first, hi = ranges[k % d].second;
      (k < d ? a : b)[j * d + k % d] = lo + u * (hi - lo);
    }
  }

  // rows: A (0..n), B (n..2n), AB_i (n(2+i)..)
  const std::size_t total = n * (2 + d);
  std::vector<double> y(total);
  parallel_for(total, opts.workers, [&](std::size_t idx) {
    std::vector<double> x(d);
    const std::size_t block = idx / n, j = idx % n;
    if (block == 0) {
      std::copy_n(a.begin() + static_cast<std::ptrdiff_t>(j * d), d, x.begin());
    } else if (block == 1) {
      std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(j * d), d, x.begin());
    } else {
      std::copy_n(a.begin() + static_cast<std::ptrdiff_t>(j * d), d, x.begin());
      x[block - 2] = b[j * d + block - 2];
    }
    y[idx] = model(x);
  });
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidParameters, "model returned a non-finite value");
  }

  auto fa = [&](std::size_t j) { return y[j]; };
  auto fb = [&](std::size_t j) { return y[n + j]; };
  auto fab = [&](std::size_t i, std::size_t j) { return y[n * (2 + i) + j]; };

  // estimates on a multiset of design rows
  struct Est {
    double mean, var;
    std::vector<double> s1, st;
  };
  auto estimate = [&](const std::vector<std::size_t>& rows) {
    Est e{0.0, 0.0, std::vector<double>(d), std::vector<double>(d)};
    const double m = static_cast<double>(rows.size());
    for (auto j : rows) e.mean += fa(j) + fb(j);
    e.mean /= 2.0 * m;
    for (auto j : rows) {
      e.var += (fa(j) - e.mean) * (fa(j) - e.mean) + (fb(j) - e.mean) * (fb(j) - e.mean);
    }
    e.var /= 2.0 * m - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      double sb = 0.0, sa = 0.0;
      for (auto j : rows) {
        sb += (fb(j) - fab(i, j)) * (fb(j) - fab(i, j));
        sa += (fa(j) - fab(i, j)) * (fa(j) - fab(i, j));
      }
      e.s1[i] = e.var > 0.0 ? (e.var - sb / (2.0 * m)) / e.var : 0.0;
      e.st[i] = e.var > 0.0 ? sa / (2.0 * m * e.var) : 0.0;
    }
    return e;
  };

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Est point = estimate(all);
  const double scale = std::max(std::abs(point.mean), 1e-300);
  if (!(point.var > 1e-20 * scale * scale)) {
    throw Error(Errc::DegenerateVariance, "output variance is zero over the design; indices undefined");
  }

  std::vector<std::vector<double>> boot_s1(d), boot_st(d);
  RngStream rng(opts.seed, 0xB007);
  std::vector<std::size_t> rows(n);
  for (std::size_t r = 0; r < opts.n_bootstrap; ++r) {
    for (auto& row : rows) row = static_cast<std::size_t>(rng.next_u64() % n);
    const Est e = estimate(rows);
    for (std::size_t i = 0; i < d; ++i) {
      boot_s1[i].push_back(e.s1[i]);
      boot_st[i].push_back(e.st[i]);
    }
  }

  SobolResult res;
  res.n_base = n;
  res.evaluations = total;
  res.variance = point.var;
  res.mean = point.mean;
  for (std::size_t i = 0; i < d; ++i) {
    SobolIndex idx;
    idx.name = names[i];
    idx.s1 = point.s1[i];
    idx.st = point.st[i];
    if (opts.n_bootstrap > 0) {
      const auto c1 = percentile_interval(boot_s1[i], opts.ci_level, idx.s1);
      const auto ct = percentile_interval(boot_st[i], opts.ci_level, idx.st);
      idx.s1_lo = c1.lo;
      idx.s1_hi = c1.hi;
      idx.st_lo = ct.lo;
      idx.st_hi = ct.hi;
    } else {
      idx.s1_lo = idx.s1_hi = idx.s1;
      idx.st_lo = idx.st_hi = idx.st;
    }
    res.indices.push_back(idx);
  }
  return res;
}

SobolResult sobol_indices(const SimScenario& sc, const std::vector<SensitivityInput>& inputs,
                          std::size_t inner_runs, TteStatistic stat, SobolOptions opts) {
  std::vector<std::pair<double, double>> ranges;
  std::vector<std::string> names;
  for (const auto& in : inputs) {
    ranges.emplace_back(in.lo, in.hi);
    names.emplace_back(param_name(in.param));
  }
  auto model = [&](std::span<const double> x) {
    SimScenario s = sc;
    for (std::size_t k = 0; k < inputs.size(); ++k) set_param(s, inputs[k].param, x[k]);
    return evaluate_statistic(s, inner_runs, stat, 1);
  };
  opts.seed = sc.seed;
  return sobol_indices(model, ranges, names, opts);
}

// ---------------------------------------------------------------------------

bool RiskFrontier::empty() const {
  return std::none_of(columns.begin(), columns.end(),
                      [](const FrontierPoint& p) { return p.status == FrontierPoint::Status::Crossing; });
}

RiskFrontier risk_frontier(const SimScenario& sc, std::vector<double> t_env_grid,
                           std::vector<double> rho_ws_grid, double t_min, std::size_t n_runs,
                           unsigned workers) {
  if (t_env_grid.empty() || rho_ws_grid.empty()) {
    throw Error(Errc::InvalidParameters, "frontier grids must be non-empty");
  }
  std::sort(rho_ws_grid.begin(), rho_ws_grid.end());
  RiskFrontier out;
  const std::size_t m = rho_ws_grid.size();
  out.cells.resize(t_env_grid.size() * m);
  for (std::size_t a = 0; a < t_env_grid.size(); ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      SimScenario s = sc;
      set_param(s, SensitivityParam::TEnv, t_env_grid[a]);
      set_param(s, SensitivityParam::RhoWs, rho_ws_grid[b]);
      auto& cell = out.cells[a * m + b];
      cell.t_env = t_env_grid[a];
      cell.rho_ws = rho_ws_grid[b];
      cell.t05 = evaluate_statistic(s, n_runs, TteStatistic::T05, workers);
      cell.violates = cell.t05 < t_min;
    }
  }
  for (std::size_t a = 0; a < t_env_grid.size(); ++a) {
    FrontierPoint p;
    p.t_env = t_env_grid[a];
    const FrontierCell* row = &out.cells[a * m];
    if (row[0].violates) {
      p.status = FrontierPoint::Status::AllBelow;
      p.rho_ws = row[0].rho_ws;
    } else {
      p.status = FrontierPoint::Status::Unbounded;
      for (std::size_t b = 1; b < m; ++b) {
        if (row[b].violates) {
          const double y0 = row[b - 1].t05 - t_min, y1 = row[b].t05 - t_min;
          const double w = y0 / (y0 - y1);
          p.status = FrontierPoint::Status::Crossing;
          p.rho_ws = row[b - 1].rho_ws + w * (row[b].rho_ws - row[b - 1].rho_ws);
          break;
        }
      }
    }
    out.columns.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

CtmcSpec scale_dwell(const CtmcSpec& spec, double factor) {
  if (!(factor > 0.0)) throw Error(Errc::NonPositiveDwell, "dwell scale factor must be positive");
  CtmcSpec out = spec;
  for (auto& d : out.dwell_minutes) d *= factor;
  return out;
}

CtmcSpec bias_high_power(const CtmcSpec& spec, const std::vector<ModeSpec>& modes, double delta) {
  if (modes.size() != spec.size()) {
    throw Error(Errc::InvalidMix, "mode table and chain sizes differ");
  }
  std::vector<std::size_t> order(modes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return modes[x].mu_p > modes[y].mu_p; });
  order.resize(std::min<std::size_t>(3, order.size()));

  CtmcSpec out = spec;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& row = out.transition_mix[i];
    std::vector<std::size_t> dest;
    for (auto j : order) {
      if (j != i) dest.push_back(j);
    }
    if (dest.empty()) continue;
    double mass = 0.0;
    for (auto j : dest) mass += row[j];
    for (auto j : dest) {
      row[j] += mass > 0.0 ? delta * row[j] / mass : delta / static_cast<double>(dest.size());
    }
    double total = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != i) total += row[j];
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != i) row[j] /= total;
    }
  }
  return out;
}

std::vector<PerturbationRow> usage_perturbation_study(const SimScenario& sc, std::size_t n_runs,
                                                      unsigned workers) {
  struct Variant {
    std::string name;
    CtmcSpec ctmc;
  };
  const std::vector<Variant> variants{
      {"baseline", sc.usage.ctmc},
      {"dwell_x0.8", scale_dwell(sc.usage.ctmc, 0.8)},
      {"dwell_x1.2", scale_dwell(sc.usage.ctmc, 1.2)},
      {"high_power_bias", bias_high_power(sc.usage.ctmc, sc.usage.modes, 0.10)},
  };
  std::vector<PerturbationRow> rows;
  for (const auto& v : variants) {
    SimScenario s = sc;
    s.usage.ctmc = v.ctmc;
    const auto dist = run_monte_carlo(s, n_runs, workers);
    PerturbationRow r;
    r.variant = v.name;
    r.mean = tte_statistic(dist, TteStatistic::Mean);
    r.t05 = tte_statistic(dist, TteStatistic::T05);
    if (!rows.empty()) {
      r.d_mean_pct = 100.0 * (r.mean - rows.front().mean) / rows.front().mean;
      r.d_t05_pct = 100.0 * (r.t05 - rows.front().t05) / rows.front().t05;
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------

TimeSeries voltage_series(const Trajectory& tr) {
  TimeSeries s;
  for (const auto& p : tr.series) {
    s.t.push_back(p.t);
    s.v.push_back(p.v_term);
  }
  return s;
}

ReferenceTrace read_reference_trace(const std::filesystem::path& path, bool discharge_negative) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      std::string f = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
      while (!f.empty() && f.front() == ' ') f.erase(f.begin());
      out.push_back(std::move(f));
      if (comma == std::string::npos) return out;
      start = comma + 1;
    }
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaError, path.string() + ": empty reference file");
  const auto header = split(line);
  auto col = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ct = col("time_s"), cv = col("voltage_v"), ci = col("current_a");
  if (!ct || !cv) throw Error(Errc::SchemaError, path.string() + ": needs time_s and voltage_v columns");

  ReferenceTrace ref;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split(line);
    const std::string where = path.string() + ": row " + std::to_string(row);
    if (f.size() != header.size()) throw Error(Errc::SchemaError, where + " has the wrong field count");
    double t = 0.0, v = 0.0, i = 0.0;
    try {
      t = std::stod(f[*ct]);
      v = std::stod(f[*cv]);
      if (ci) i = std::stod(f[*ci]);
    } catch (const std::logic_error&) {
      throw Error(Errc::SchemaError, where + " has a non-numeric value");
    }
    if (!ref.trace.t.empty() && !(t > ref.trace.t.back())) {
      throw Error(Errc::NonMonotoneTime, where + " does not advance time");
    }
    ref.trace.t.push_back(t);
    ref.trace.v.push_back(v);
    if (ci) ref.current.push_back(discharge_negative ? -i : i);
  }
  return ref;
}

void write_reference_trace(const std::filesystem::path& path, const ReferenceTrace& ref) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  const bool with_current = !ref.current.empty();
  out << (with_current ? "time_s,voltage_v,current_a\n" : "time_s,voltage_v\n");
  char buf[96];
  for (std::size_t k = 0; k < ref.trace.t.size(); ++k) {
    // full precision so that a model trace reloads bit for bit
    if (with_current) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", ref.trace.t[k], ref.trace.v[k], ref.current[k]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ref.trace.t[k], ref.trace.v[k]);
    }
    out << buf;
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

LoadProfile current_profile(const ReferenceTrace& ref) {
  if (ref.current.empty() || ref.current.size() != ref.trace.t.size()) {
    throw Error(Errc::InvalidParameters, "reference trace has no current column");
  }
  LoadProfile lp{LoadProfile::Kind::Current, {0.0}, {std::max(0.0, ref.current.front())}};
  for (std::size_t k = 1; k < ref.current.size(); ++k) {
    lp.t_start.push_back(ref.trace.t[k] - ref.trace.t.front());
    lp.value.push_back(std::max(0.0, ref.current[k]));
  }
  return lp;
}

ValidationReport validation_metrics(const TimeSeries& predicted, const TimeSeries& reference,
                                    double tau_predicted, double tau_reference) {
  if (reference.t.size() < 2 || reference.t.size() != reference.v.size()) {
    throw Error(Errc::InvalidParameters, "reference needs at least 2 (t, V) points");
  }
  if (predicted.t.empty() || predicted.t.size() != predicted.v.size()) {
    throw Error(Errc::InvalidParameters, "predicted series is empty or ragged");
  }
  const double lo = std::max(predicted.t.front(), reference.t.front());
  const double hi = std::min(predicted.t.back(), reference.t.back());
  ValidationReport rep;
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t r = 0; r < reference.t.size(); ++r) {
    const double t = reference.t[r];
    if (t < lo || t > hi) continue;
    while (k + 1 < predicted.t.size() && predicted.t[k + 1] < t) ++k;
    double v = predicted.v[k];
    if (predicted.t[k] != t && k + 1 < predicted.t.size()) {
      const double w = (t - predicted.t[k]) / (predicted.t[k + 1] - predicted.t[k]);
      v = w == 1.0 ? predicted.v[k + 1] : predicted.v[k] + w * (predicted.v[k + 1] - predicted.v[k]);
    }
    sum += std::abs(v - reference.v[r]) / std::abs(reference.v[r]);
    ++rep.n_points;
  }
  if (rep.n_points == 0) throw Error(Errc::NoOverlap, "predicted and reference traces do not overlap");
  rep.mape = 100.0 * sum / static_cast<double>(rep.n_points);
  rep.delta_tau = std::abs(tau_predicted - tau_reference);
  return rep;
}

Interval paired_bootstrap_ci(std::span<const double> a, std::span<const double> b,
                             const SampleStatistic& stat, std::size_t n_boot, double level,
                             std::uint64_t seed) {
  if (a.size() != b.size()) throw Error(Errc::InvalidParameters, "paired samples differ in length");
  std::vector<double> xa, xb;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isnan(a[k]) || std::isnan(b[k])) continue;
    xa.push_back(a[k]);
    xb.push_back(b[k]);
  }
  if (xa.empty()) throw Error(Errc::EmptySamples, "no complete pairs");
  const std::size_t n = xa.size();
  const double point = stat(xb) - stat(xa);
  RngStream rng(seed, 0xB0075);
  std::vector<double> ra(n), rb(n), diffs;
  diffs.reserve(n_boot);
  for (std::size_t r = 0; r < n_boot; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto j = static_cast<std::size_t>(rng.next_u64() % n);
      ra[k] = xa[j];
      rb[k] = xb[j];
    }
    diffs.push_back(stat(rb) - stat(ra));
  }
  if (diffs.empty()) return {point, point};
  return percentile_interval(std::move(diffs), level, point);
}

}  // namespace ttesim
