#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ttesim/numerics.hpp"

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

// Truncated-normal mean from the textbook formula mu + sigma (phi(a) - phi(b)) / Z.
double truncated_mean_oracle(double mu, double sigma, double lo, double hi) {
  const auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  return mu + sigma * (phi(a) - phi(b)) / (cdf(b) - cdf(a));
}

}  // namespace

TEST_CASE("interpolant reproduces knots and clamps outside the domain") {
  const auto f = build_monotone_interpolant({0.0, 0.5, 1.0}, {3.0, 3.7, 4.2});
  CHECK(f(0.5) == 3.7);
  CHECK(f(0.0) == 3.0);
  CHECK(f(1.0) == 4.2);
  CHECK(f(-0.1) == 3.0);
  CHECK(f(1.7) == 4.2);
}

TEST_CASE("interpolant reproduces linear data") {
  const auto f = build_monotone_interpolant({0.0, 0.2, 0.5, 0.9, 1.0}, {0.0, 0.2, 0.5, 0.9, 1.0});
  CHECK(std::abs(f(0.3) - 0.3) < 1e-12);
  CHECK(std::abs(f(0.77) - 0.77) < 1e-12);
}

TEST_CASE("interpolant is monotone without overshoot on random monotone data") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> step(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs{0.0}, ys{3.0};
    for (int k = 0; k < 9; ++k) {
      xs.push_back(xs.back() + 0.01 + step(gen));
      // mix flat runs and sharp jumps, the classic overshoot trap
      ys.push_back(ys.back() + (step(gen) < 0.3 ? 0.0 : std::pow(step(gen), 3)));
    }
    const auto f = build_monotone_interpolant(xs, ys);
    double prev = f(xs.front());
    for (int k = 0; k <= 1000; ++k) {
      const double x = xs.front() + (xs.back() - xs.front()) * k / 1000.0;
      const double y = f(x);
      CHECK(y >= prev - 1e-12);
      CHECK(y >= ys.front() - 1e-12);
      CHECK(y <= ys.back() + 1e-12);
      prev = y;
    }
  }
}

TEST_CASE("interpolant precondition errors") {
  CHECK(code_of([] { build_monotone_interpolant({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}); }) ==
        Errc::NonMonotoneAbscissa);
  CHECK(code_of([] { build_monotone_interpolant({0.0, 1.0}, {1.0, 2.0}); }) == Errc::TooFewKnots);
}

TEST_CASE("rk4 step on a zero field leaves the state unchanged") {
  const auto zero = [](double, const std::array<double, 2>&) { return std::array<double, 2>{0.0, 0.0}; };
  const auto r = rk4_adaptive_step<2>({1.5, -2.0}, zero, 0.0, 5.0, {1e-9, 1e-9});
  CHECK(r.state[0] == 1.5);
  CHECK(r.state[1] == -2.0);
  CHECK(r.dt_used == 1.0);
  CHECK(rk4_adaptive_step<2>({1.5, -2.0}, zero, 0.0, 0.25, {1e-9, 1e-9}).dt_used == 0.25);
}

TEST_CASE("rk4 integrates exponential decay to e^-1") {
  const auto decay = [](double, const std::array<double, 1>& x) { return std::array<double, 1>{-x[0]}; };
  std::array<double, 1> x{1.0};
  double t = 0.0;
  while (t < 1.0 - 1e-15) {
    const auto r = rk4_adaptive_step<1>(x, decay, t, 1.0 - t, {1e-9});
    CHECK(r.dt_used <= 1.0);
    x = r.state;
    t += r.dt_used;
  }
  CHECK(std::abs(x[0] - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("fixed-step rk4 error is fourth order") {
  auto decay = [](double, const std::array<double, 1>& x) { return std::array<double, 1>{-x[0]}; };
  std::vector<double> err;
  for (double h : {0.5, 0.25, 0.125}) {
    std::array<double, 1> x{1.0};
    for (int k = 0; k < static_cast<int>(std::lround(1.0 / h)); ++k) {
      x = detail::rk4<1>(x, decay(k * h, x), decay, k * h, h);
    }
    err.push_back(std::abs(x[0] - std::exp(-1.0)));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double ratio = err[k - 1] / err[k];
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
  }
}

TEST_CASE("rk4 reports underflow for a non-finite field") {
  const auto bad = [](double, const std::array<double, 1>&) {
    return std::array<double, 1>{std::numeric_limits<double>::quiet_NaN()};
  };
  CHECK(code_of([&] { rk4_adaptive_step<1>({1.0}, bad, 0.0, 1.0, {1e-6}); }) == Errc::StepUnderflow);
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int k = 0; k < 10000; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("exponential inverse cdf identity") {
  CHECK(RngStream::exponential_from_uniform(std::exp(-1.0), 0.25) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("truncated normal stays in support") {
  RngStream rng(1, 1);
  const double cap = 4.5 + 5 * 0.8;
  for (int k = 0; k < 1000000; ++k) {
    const double x = sample_truncated_normal(4.5, 0.8, 0.0, cap, rng);
    if (x < 0.0 || x > cap) {
      FAIL("draw outside support: " << x);
    }
  }
  // narrow acceptance region exercises the inverse-CDF branch
  for (int k = 0; k < 10000; ++k) {
    const double x = sample_truncated_normal(0.0, 1.0, 4.0, 4.5, rng);
    REQUIRE(x >= 4.0);
    REQUIRE(x <= 4.5);
  }
}

TEST_CASE("truncated normal point mass") {
  RngStream rng(2, 1);
  CHECK(std::abs(sample_truncated_normal(1.0, 1e-9, 0.0, 5.0, rng) - 1.0) < 1e-6);
}

TEST_CASE("truncated normal mean matches the analytic value") {
  RngStream rng(3, 1);
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_truncated_normal(0.15, 0.05, 0.0, 0.4, rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  const double expected = truncated_mean_oracle(0.15, 0.05, 0.0, 0.4);
  CHECK(std::abs(mean - expected) < 3 * se);
  CHECK(truncated_normal_mean(0.15, 0.05, 0.0, 0.4) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(code_of([&] { sample_truncated_normal(0.0, 1.0, 1.0, 1.0, rng); }) == Errc::DegenerateBounds);
}

TEST_CASE("relaxation fit recovers synthetic parameters") {
  std::vector<double> ts, vs;
  for (int k = 0; k <= 600; ++k) {
    ts.push_back(k);
    vs.push_back(3.8 - 0.1 * std::exp(-k / 100.0));
  }
  const auto fit = fit_exponential_relaxation(ts, vs);
  CHECK(std::abs(fit.v_inf / 3.8 - 1) < 1e-3);
  CHECK(std::abs(fit.v_p / 0.1 - 1) < 1e-3);
  CHECK(std::abs(fit.tau / 100.0 - 1) < 1e-3);
  CHECK(fit.rmse >= 0.0);
}

TEST_CASE("relaxation fit of a flat trace") {
  const std::vector<double> ts{0, 1, 2, 3, 4, 5};
  const std::vector<double> vs(6, 3.8);
  const auto fit = fit_exponential_relaxation(ts, vs);
  CHECK(fit.v_inf == doctest::Approx(3.8));
  CHECK(fit.v_p == 0.0);
  CHECK(fit.rmse == doctest::Approx(0.0));
  CHECK(fit.vp_negligible);
  CHECK(fit.tau > 0.0);
}

TEST_CASE("relaxation fit needs five samples") {
  const std::vector<double> ts{0, 1, 2}, vs{3.7, 3.75, 3.78};
  CHECK(code_of([&] { fit_exponential_relaxation(ts, vs); }) == Errc::InsufficientSamples);
}

TEST_CASE("nearest-rank quantile") {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);
  std::shuffle(s.begin(), s.end(), std::mt19937_64(5));
  CHECK(empirical_quantile(s, 0.05) == 5.0);
  CHECK(empirical_quantile(std::vector<double>{7.0}, 0.3) == 7.0);
  CHECK(empirical_quantile(std::vector<double>{3, 1, 2}, 0.5) == 2.0);
  CHECK(code_of([] { empirical_quantile(std::vector<double>{}, 0.5); }) == Errc::EmptySamples);
}

TEST_CASE("quantile agrees with a sort-and-index oracle") {
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> len(1, 10000);
  std::normal_distribution<double> val(0.0, 10.0);
  std::uniform_real_distribution<double> qd(0.001, 0.999);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(len(gen)));
    for (auto& x : s) x = val(gen);
    const double q = qd(gen);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.size())));
    CHECK(empirical_quantile(s, q) == sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
}
