#include "ttesim/numerics.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <numbers>
#include <string>

namespace ttesim {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonMonotoneAbscissa: return "NonMonotoneAbscissa";
    case Errc::TooFewKnots: return "TooFewKnots";
    case Errc::StepUnderflow: return "StepUnderflow";
    case Errc::DegenerateBounds: return "DegenerateBounds";
    case Errc::FitDiverged: return "FitDiverged";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::EmptySamples: return "EmptySamples";
    case Errc::CapacityExhausted: return "CapacityExhausted";
    case Errc::NegativeEffectiveVoltage: return "NegativeEffectiveVoltage";
    case Errc::InvalidParameters: return "InvalidParameters";
    case Errc::InvalidMix: return "InvalidMix";
    case Errc::NonPositiveDwell: return "NonPositiveDwell";
    case Errc::AllRunsCensored: return "AllRunsCensored";
    case Errc::SchemaError: return "SchemaError";
    case Errc::NonMonotoneTime: return "NonMonotoneTime";
    case Errc::NoQuasiStaticSegment: return "NoQuasiStaticSegment";
    case Errc::NoStepFound: return "NoStepFound";
    case Errc::NoRestSegment: return "NoRestSegment";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// MonotoneInterpolant
// ---------------------------------------------------------------------------

namespace {

// Three-point end slope, limited so the end segment stays monotone.
double end_slope(double h0, double h1, double d0, double d1) {
  double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (s * d0 <= 0.0) {
    s = 0.0;
  } else if (d0 * d1 < 0.0 && std::abs(s) > std::abs(3.0 * d0)) {
    s = 3.0 * d0;
  }
  return s;
}

}  // namespace

MonotoneInterpolant::MonotoneInterpolant(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size()) {
    throw Error(Errc::InvalidParameters, "interpolant knot arrays differ in length");
  }
  if (xs_.size() < 3) {
    throw Error(Errc::TooFewKnots, "need at least 3 knots, got " + std::to_string(xs_.size()));
  }
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
      throw Error(Errc::InvalidParameters, "non-finite knot at index " + std::to_string(i));
    }
    if (i > 0 && !(xs_[i] > xs_[i - 1])) {
      throw Error(Errc::NonMonotoneAbscissa,
                  "knot x[" + std::to_string(i) + "] does not exceed x[" + std::to_string(i - 1) + "]");
    }
  }

  const std::size_t n = xs_.size();
  std::vector<double> h(n - 1);
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs_[i + 1] - xs_[i];
    delta[i] = (ys_[i + 1] - ys_[i]) / h[i];
  }

  slopes_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] > 0.0) {
      // weighted harmonic mean; keeps the Hermite cubic inside the Fritsch-Carlson region
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  slopes_.front() = end_slope(h[0], h[1], delta[0], delta[1]);
  slopes_.back() = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneInterpolant::operator()(double x) const noexcept {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[i + 1] - xs_[i];
  const double s = (x - xs_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * ys_[i] + h * h10 * slopes_[i] + h01 * ys_[i + 1] + h * h11 * slopes_[i + 1];
}

MonotoneInterpolant build_monotone_interpolant(std::vector<double> xs, std::vector<double> ys) {
  return MonotoneInterpolant(std::move(xs), std::move(ys));
}

// ---------------------------------------------------------------------------
// RngStream
// ---------------------------------------------------------------------------

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

// ---------------------------------------------------------------------------
// Truncated normal
// ---------------------------------------------------------------------------

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

void check_truncation(double sigma, double lo, double hi) {
  if (!(lo < hi)) {
    throw Error(Errc::DegenerateBounds,
                "truncation bounds [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  if (!(sigma > 0.0)) throw Error(Errc::InvalidParameters, "sigma must be positive");
}

}  // namespace

double sample_truncated_normal(double mu, double sigma, double lo, double hi, RngStream& rng) {
  check_truncation(sigma, lo, hi);
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;

  // Evaluate the mass on the side of the mode where the CDF is not close to 1.
  const bool mirror = a > 0.0;
  const double lo_s = mirror ? -b : a;
  const double hi_s = mirror ? -a : b;
  const double p_lo = std_normal_cdf(lo_s);
  const double p_hi = std_normal_cdf(hi_s);
  const double mass = p_hi - p_lo;

  if (mass >= 0.01) {
    for (;;) {
      const double x = mu + sigma * rng.normal();
      if (x >= lo && x <= hi) return x;
    }
  }

  const double u = p_lo + rng.uniform() * mass;
  double zs = std_normal_quantile(u);
  zs = std::clamp(zs, lo_s, hi_s);
  const double z = mirror ? -zs : zs;
  return std::clamp(mu + sigma * z, lo, hi);
}

double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
  check_truncation(sigma, lo, hi);
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double mass = std_normal_cdf(b) - std_normal_cdf(a);
  return mu + sigma * (std_normal_pdf(a) - std_normal_pdf(b)) / mass;
}

// ---------------------------------------------------------------------------
// Exponential relaxation fit
// ---------------------------------------------------------------------------

namespace {

struct FitState {
  double v_inf;
  double v_p;
  double log_tau;
};

double sse(std::span<const double> ts, std::span<const double> vs, const FitState& p) {
  const double tau = std::exp(p.log_tau);
  double s = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = vs[k] - (p.v_inf - p.v_p * std::exp(-(ts[k] - ts[0]) / tau));
    s += r * r;
  }
  return s;
}

// Solve the 3x3 system (A + lambda diag(A)) x = g in place by Gaussian elimination.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> g,
            std::array<double, 3>& x) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[piv], a[c]);
    std::swap(g[piv], g[c]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      g[r] -= f * g[c];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = g[r];
    for (int k = r + 1; k < 3; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// Damped Gauss-Newton (Levenberg-Marquardt) from one seed.
bool refine(std::span<const double> ts, std::span<const double> vs, FitState& p) {
  double lambda = 1e-3;
  double cost = sse(ts, vs, p);
  if (!std::isfinite(cost)) return false;
  for (int iter = 0; iter < 500; ++iter) {
    const double tau = std::exp(p.log_tau);
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double dt = ts[k] - ts[0];
      const double e = std::exp(-dt / tau);
      const double r = vs[k] - (p.v_inf - p.v_p * e);
      // d(model)/d(v_inf, v_p, log_tau)
      const std::array<double, 3> j{1.0, -e, -p.v_p * e * dt / tau};
      for (int a = 0; a < 3; ++a) {
        jtr[a] += j[a] * r;
        for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
      }
    }
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      auto damped = jtj;
      for (int a = 0; a < 3; ++a) damped[a][a] += lambda * std::max(jtj[a][a], 1e-30);
      std::array<double, 3> step{};
      if (!solve3(damped, jtr, step)) {
        lambda *= 10.0;
        continue;
      }
      FitState trial{p.v_inf + step[0], p.v_p + step[1], p.log_tau + step[2]};
      const double trial_cost = sse(ts, vs, trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const bool small = std::abs(step[0]) + std::abs(step[1]) < 1e-14 &&
                           std::abs(step[2]) < 1e-12;
        const double drop = cost - trial_cost;
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (small || drop <= 1e-15 * cost) return true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) return std::isfinite(cost);
  }
  return std::isfinite(cost);
}

}  // namespace

RelaxationFit fit_exponential_relaxation(std::span<const double> ts, std::span<const double> vs) {
  if (ts.size() != vs.size()) {
    throw Error(Errc::InvalidParameters, "time and voltage series differ in length");
  }
  if (ts.size() < 5) {
    throw Error(Errc::InsufficientSamples,
                "relaxation fit needs at least 5 samples, got " + std::to_string(ts.size()));
  }
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (!(ts[k] > ts[k - 1])) {
      throw Error(Errc::NonMonotoneAbscissa, "relaxation timestamps must increase");
    }
  }

  constexpr double kSeedLo = 1.0;
  constexpr double kSeedHi = 1e4;
  constexpr int kSeeds = 13;

  const auto [vmin, vmax] = std::minmax_element(vs.begin(), vs.end());
  const double scale = std::max(1.0, std::abs(*vmax));
  if (*vmax - *vmin <= 1e-12 * scale) {
    double mean = 0.0;
    for (double v : vs) mean += v;
    mean /= static_cast<double>(vs.size());
    return RelaxationFit{mean, 0.0, kSeedLo, 0.0, true};
  }

  RelaxationFit best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kSeeds; ++s) {
    const double tau0 =
        kSeedLo * std::pow(kSeedHi / kSeedLo, static_cast<double>(s) / (kSeeds - 1));
    FitState p{vs.back(), vs.back() - vs.front(), std::log(tau0)};
    if (!refine(ts, vs, p)) continue;
    const double cost = sse(ts, vs, p);
    if (cost < best_cost && std::isfinite(p.log_tau)) {
      best_cost = cost;
      best = RelaxationFit{p.v_inf, p.v_p, std::exp(p.log_tau),
                           std::sqrt(cost / static_cast<double>(ts.size())), false};
    }
  }
  if (!std::isfinite(best_cost)) {
    throw Error(Errc::FitDiverged, "no seed of the relaxation fit converged");
  }
  return best;
}

// ---------------------------------------------------------------------------
// Quantile
// ---------------------------------------------------------------------------

double empirical_quantile(std::span<const double> samples, double q) {
  if (samples.empty()) throw Error(Errc::EmptySamples, "quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(Errc::InvalidParameters, "quantile level must lie in (0, 1)");
  }
  const std::size_t n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::vector<double> copy(samples.begin(), samples.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
  return copy[rank - 1];
}

}  // namespace ttesim
