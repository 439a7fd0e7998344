#include "ttesim/identification.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ttesim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

std::vector<CyclePulseRecord> parse_cycles(std::istream& in, bool discharge_negative,
                                           const std::string& source) {
  static const std::array<std::string, 5> kColumns{"time_s", "voltage_v", "current_a", "cycle_id",
                                                   "cell_id"};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::SchemaError, source + ": missing header row");
  }
  const auto header = split_csv_line(line);
  std::array<std::size_t, 5> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw Error(Errc::SchemaError, source + ": missing required column '" + kColumns[c] + "'");
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<CyclePulseRecord> records;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::size_t> last_row;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(Errc::SchemaError, source + ": row " + std::to_string(row) + " has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    double t = 0.0, v = 0.0, i = 0.0;
    if (!parse_double(fields[col[0]], t) || !parse_double(fields[col[1]], v) ||
        !parse_double(fields[col[2]], i)) {
      throw Error(Errc::SchemaError, source + ": row " + std::to_string(row) + " has a non-numeric value");
    }
    const auto key = std::make_pair(fields[col[4]], fields[col[3]]);
    auto [it, inserted] = index.try_emplace(key, records.size());
    if (inserted) {
      records.push_back({});
      records.back().cell_id = key.first;
      records.back().cycle_id = key.second;
      last_row.push_back(0);
    }
    auto& rec = records[it->second];
    if (!rec.t.empty() && !(t > rec.t.back())) {
      throw Error(Errc::NonMonotoneTime,
                  source + ": row " + std::to_string(row) + " (cell " + key.first + ", cycle " +
                      key.second + ") has time " + std::to_string(t) +
                      " not after the previous sample in row " + std::to_string(last_row[it->second]));
    }
    rec.t.push_back(t);
    rec.v.push_back(v);
    rec.i.push_back(discharge_negative ? -i : i);
    last_row[it->second] = row;
  }
  return records;
}

std::vector<CyclePulseRecord> ingest_cycles(const std::filesystem::path& path, bool discharge_negative) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return parse_cycles(in, discharge_negative, path.string());
}

void write_cycles_csv(const std::filesystem::path& path, const std::vector<CyclePulseRecord>& records,
                      bool discharge_negative) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.precision(10);
  out << "time_s,voltage_v,current_a,cycle_id,cell_id\n";
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      out << r.t[k] << ',' << r.v[k] << ',' << (discharge_negative ? -r.i[k] : r.i[k]) << ','
          << r.cycle_id << ',' << r.cell_id << '\n';
    }
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

OcvExtraction extract_ocv(const CyclePulseRecord& record, double q_max, double i_threshold,
                          double z_start) {
  if (!(q_max > 0.0) || !(i_threshold > 0.0)) {
    throw Error(Errc::InvalidParameters, "q_max and i_threshold must be positive");
  }
  const std::size_t n = record.t.size();
  // longest run of quasi-static discharge samples
  std::size_t best_lo = 0, best_len = 0;
  for (std::size_t k = 0; k < n;) {
    if (!(record.i[k] > 0.0 && record.i[k] <= i_threshold)) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e < n && record.i[e] > 0.0 && record.i[e] <= i_threshold) ++e;
    if (e - k > best_len) {
      best_lo = k;
      best_len = e - k;
    }
    k = e;
  }
  if (best_len < 10) {
    throw Error(Errc::NoQuasiStaticSegment,
                "no run of at least 10 samples with 0 < i <= " + std::to_string(i_threshold) + " A");
  }

  std::vector<double> z(best_len), v(best_len);
  z[0] = z_start;
  v[0] = record.v[best_lo];
  for (std::size_t k = 1; k < best_len; ++k) {
    const std::size_t a = best_lo + k - 1, b = best_lo + k;
    const double charge = 0.5 * (record.i[a] + record.i[b]) * (record.t[b] - record.t[a]);
    z[k] = z[k - 1] - charge / (3600.0 * q_max);
    v[k] = record.v[b];
  }

  // evenly spaced subset including both ends
  std::vector<std::size_t> picks;
  if (best_len <= kMaxOcvKnots) {
    for (std::size_t k = 0; k < best_len; ++k) picks.push_back(k);
  } else {
    for (std::size_t j = 0; j < kMaxOcvKnots; ++j) {
      picks.push_back(static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * static_cast<double>(best_len - 1) /
                       static_cast<double>(kMaxOcvKnots - 1))));
    }
  }

  // walking forward in time SOC falls, so voltage must fall strictly too
  OcvExtraction out;
  std::vector<double> zs, vs;
  std::size_t dropped = 0;
  for (std::size_t k : picks) {
    if (!zs.empty() && !(z[k] < zs.back() && v[k] < vs.back())) {
      ++dropped;
      continue;
    }
    zs.push_back(z[k]);
    vs.push_back(v[k]);
  }
  if (dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(dropped) +
                           " OCV knot(s) to keep the curve strictly increasing");
  }
  if (zs.size() < 2) {
    out.warnings.push_back("only " + std::to_string(zs.size()) +
                           " OCV knot survived; segment carries no usable OCV shape");
  }
  out.soc.assign(zs.rbegin(), zs.rend());
  out.volts.assign(vs.rbegin(), vs.rend());
  return out;
}

double identify_ohmic(const CyclePulseRecord& record) {
  double best = 0.0;
  std::size_t at = 0;
  for (std::size_t k = 1; k < record.i.size(); ++k) {
    const double di = std::abs(record.i[k] - record.i[k - 1]);
    if (di >= kStepThreshold && di > best) {
      best = di;
      at = k;
    }
  }
  if (at == 0) {
    throw Error(Errc::NoStepFound, "no current step of at least 0.5 A between adjacent samples");
  }
  const double di = record.i[at] - record.i[at - 1];
  const double dv = record.v[at] - record.v[at - 1];
  return -dv / di;
}

PolarizationEstimate identify_polarization(const CyclePulseRecord& record) {
  const std::size_t n = record.i.size();
  for (std::size_t r = 1; r < n; ++r) {
    const bool rest = std::abs(record.i[r]) <= kRestCurrent;
    const bool after_discharge = record.i[r - 1] > kRestCurrent;
    if (!rest || !after_discharge) continue;
    std::size_t e = r;
    while (e < n && std::abs(record.i[e]) <= kRestCurrent) ++e;
    const double duration = record.t[e - 1] - record.t[r];
    // a time constant of at least 1 s needs a few seconds to be observable
    if (duration < 3.0 || e - r < 4) continue;

    PolarizationEstimate est;
    est.step_current = record.i[r - 1] - record.i[r];
    est.fit = fit_exponential_relaxation(std::span(record.t).subspan(r, e - r),
                                         std::span(record.v).subspan(r, e - r));
    est.tau_p = est.fit.tau;
    est.r_p = est.fit.v_p / est.step_current;
    est.c_p = est.r_p > 0.0 ? est.tau_p / est.r_p : 0.0;
    return est;
  }
  throw Error(Errc::NoRestSegment, "no rest segment of at least 3 s following a discharge");
}

IdentifiedParams identify(const std::vector<CyclePulseRecord>& records, const IdentifyOptions& opts) {
  IdentifiedParams out;
  bool have_rc = false;
  bool have_ocv = false;
  std::string last_rc_error = "no records";
  for (const auto& rec : records) {
    if (!have_rc) {
      try {
        const double r0 = identify_ohmic(rec);
        const auto pol = identify_polarization(rec);
        out.r0 = r0;
        out.r_p = pol.r_p;
        out.c_p = pol.c_p;
        out.tau_p = pol.tau_p;
        out.relaxation_rmse = pol.fit.rmse;
        if (pol.fit.vp_negligible) {
          out.warnings.push_back("relaxation amplitude is negligible in cycle " + rec.cycle_id);
        }
        have_rc = true;
      } catch (const Error& e) {
        last_rc_error = e.what();
      }
    }
    if (!have_ocv) {
      try {
        auto ocv = extract_ocv(rec, opts.q_max, opts.i_threshold, opts.z_start);
        out.ocv_soc = std::move(ocv.soc);
        out.ocv_volts = std::move(ocv.volts);
        for (auto& w : ocv.warnings) out.warnings.push_back(std::move(w));
        have_ocv = true;
      } catch (const Error& e) {
        if (e.code() != Errc::NoQuasiStaticSegment) throw;
      }
    }
  }
  if (!have_rc) {
    throw Error(Errc::NoStepFound, "no record supports step/rest identification (" + last_rc_error + ")");
  }
  if (!have_ocv) out.warnings.push_back("no quasi-static segment found; OCV left unchanged");
  return out;
}

BatteryParams apply_identified(const BatteryParams& base, const IdentifiedParams& id) {
  BatteryParams p = base;
  p.r_ref = id.r0;
  p.r_p = id.r_p;
  p.c_p = id.c_p;
  p.tau_p = id.tau_p;
  if (id.ocv_soc.size() >= 3) p.ocv = MonotoneInterpolant(id.ocv_soc, id.ocv_volts);
  return p;
}

CyclePulseRecord synthesize_record(const BatteryParams& params, BatteryState state, double t_env,
                                   const std::vector<std::pair<double, double>>& segments,
                                   double dt_sample, double noise_sigma, std::uint64_t noise_seed) {
  if (!(dt_sample > 0.0)) throw Error(Errc::InvalidParameters, "dt_sample must be positive");
  RngStream rng(noise_seed, 0);
  CyclePulseRecord rec;
  rec.cycle_id = "1";
  rec.cell_id = "synthetic";
  constexpr std::array<double, 3> tol{1e-9, 1e-7, 1e-6};

  double t_seg_start = 0.0;
  double t = 0.0;
  std::size_t k = 0;
  for (const auto& [duration, current] : segments) {
    const double t_seg_end = t_seg_start + duration;
    // samples at k * dt_sample inside [t_seg_start, t_seg_end)
    while (static_cast<double>(k) * dt_sample < t_seg_end - 1e-9) {
      const double tk = static_cast<double>(k) * dt_sample;
      // advance to tk under the current of the segment
      while (t < tk - 1e-12) {
        auto deriv = [&](double, const std::array<double, 3>& x) {
          const BatteryState s{x[0], x[1], x[2]};
          const auto r = state_derivatives(params, s, current, t_env);
          return std::array<double, 3>{r.dz, r.dv_p, r.dT};
        };
        const auto step = rk4_adaptive_step<3>({state.z, state.v_p, state.t_core}, deriv, t, tk - t, tol);
        state = {step.state[0], step.state[1], step.state[2]};
        t += step.dt_used;
      }
      t = tk;
      const double r0 = arrhenius_r0(params, state.t_core);
      double v = params.ocv(state.z) - state.v_p - current * r0;
      if (noise_sigma > 0.0) v += noise_sigma * rng.normal();
      rec.t.push_back(tk);
      rec.v.push_back(v);
      rec.i.push_back(current);
      ++k;
    }
    // integrate the remainder of the segment so the next one starts in step
    while (t < t_seg_end - 1e-12) {
      auto deriv = [&](double, const std::array<double, 3>& x) {
        const BatteryState s{x[0], x[1], x[2]};
        const auto r = state_derivatives(params, s, current, t_env);
        return std::array<double, 3>{r.dz, r.dv_p, r.dT};
      };
      const auto step =
          rk4_adaptive_step<3>({state.z, state.v_p, state.t_core}, deriv, t, t_seg_end - t, tol);
      state = {step.state[0], step.state[1], step.state[2]};
      t += step.dt_used;
    }
    t = t_seg_end;
    t_seg_start = t_seg_end;
  }
  return rec;
}

}  // namespace ttesim
