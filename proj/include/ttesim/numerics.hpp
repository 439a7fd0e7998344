#pragma once

// Numerical kernels shared by the battery, usage and simulation layers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "ttesim/error.hpp"

namespace ttesim {

// ---------------------------------------------------------------------------
// Monotone cubic Hermite interpolation (Fritsch-Carlson slopes)
// ---------------------------------------------------------------------------

class MonotoneInterpolant {
 public:
  MonotoneInterpolant() = default;

  /// Throws NonMonotoneAbscissa, TooFewKnots, or InvalidParameters on
  /// size mismatch / non-finite data.
  MonotoneInterpolant(std::vector<double> xs, std::vector<double> ys);

  /// Clamps to the boundary knot value outside [xs.front(), xs.back()].
  [[nodiscard]] double operator()(double x) const noexcept;

  [[nodiscard]] const std::vector<double>& knots_x() const noexcept { return xs_; }
  [[nodiscard]] const std::vector<double>& knots_y() const noexcept { return ys_; }
  [[nodiscard]] const std::vector<double>& slopes() const noexcept { return slopes_; }
  [[nodiscard]] bool empty() const noexcept { return xs_.empty(); }

  friend bool operator==(const MonotoneInterpolant& a, const MonotoneInterpolant& b) {
    return a.xs_ == b.xs_ && a.ys_ == b.ys_;
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

MonotoneInterpolant build_monotone_interpolant(std::vector<double> xs, std::vector<double> ys);

inline double eval_interpolant(const MonotoneInterpolant& f, double x) noexcept { return f(x); }

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// A reproducible random stream keyed by (seed, stream_id). All variates are
/// derived from the raw 64-bit engine output with code in this library, so
/// sequences do not depend on the standard library's distribution classes.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  double exponential(double rate) { return exponential_from_uniform(uniform(), rate); }

  static double exponential_from_uniform(double u, double rate) { return -std::log(u) / rate; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Draw from N(mu, sigma^2) conditioned on [lo, hi]. Rejection sampling when
/// the acceptance probability is at least 1%, inverse CDF otherwise.
double sample_truncated_normal(double mu, double sigma, double lo, double hi, RngStream& rng);

/// Mean of N(mu, sigma^2) truncated to [lo, hi].
double truncated_normal_mean(double mu, double sigma, double lo, double hi);

// ---------------------------------------------------------------------------
// Adaptive RK4 with step halving
// ---------------------------------------------------------------------------

inline constexpr double kMaxStep = 1.0;        // s
inline constexpr double kMinStep = 1e-6;       // s

template <std::size_t N>
struct StepResult {
  std::array<double, N> state;
  double dt_used;
};

namespace detail {

template <std::size_t N, typename Deriv>
std::array<double, N> rk4(const std::array<double, N>& x, const std::array<double, N>& k1,
                          Deriv& deriv, double t, double h) {
  std::array<double, N> tmp{};
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  const auto k2 = deriv(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  const auto k3 = deriv(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + h * k3[i];
  const auto k4 = deriv(t + h, tmp);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace detail

/// Classical RK4 with step-doubling error control. Starts at min(dt_max, 1 s)
/// and halves until the full-step and two-half-step results agree within
/// `tol` per component; the two-half-step result is returned.
/// `deriv(t, x)` returns dx/dt as std::array<double, N>.
template <std::size_t N, typename Deriv>
StepResult<N> rk4_adaptive_step(const std::array<double, N>& state, Deriv&& deriv, double t,
                                double dt_max, const std::array<double, N>& tol) {
  double h = std::min(dt_max, kMaxStep);
  const auto k1 = deriv(t, state);
  while (h >= kMinStep) {
    const auto full = detail::rk4(state, k1, deriv, t, h);
    const auto half = detail::rk4(state, k1, deriv, t, 0.5 * h);
    const auto k1_mid = deriv(t + 0.5 * h, half);
    const auto two_half = detail::rk4(half, k1_mid, deriv, t + 0.5 * h, 0.5 * h);
    bool ok = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double err = std::abs(two_half[i] - full[i]);
      if (!(err <= tol[i])) {  // also rejects NaN
        ok = false;
        break;
      }
    }
    if (ok) return {two_half, h};
    h *= 0.5;
  }
  throw Error(Errc::StepUnderflow, "step size fell below 1e-6 s at t = " + std::to_string(t));
}

// ---------------------------------------------------------------------------
// Curve fitting and statistics
// ---------------------------------------------------------------------------

struct RelaxationFit {
  double v_inf = 0.0;   // V
  double v_p = 0.0;     // V
  double tau = 1.0;     // s
  double rmse = 0.0;    // V
  bool vp_negligible = false;
};

/// Least-squares fit of v(t) = v_inf - v_p * exp(-(t - t0) / tau), t0 = ts.front().
RelaxationFit fit_exponential_relaxation(std::span<const double> ts, std::span<const double> vs);

/// Nearest-rank quantile: the ceil(q * n)-th smallest sample (1-based).
double empirical_quantile(std::span<const double> samples, double q);

}  // namespace ttesim
