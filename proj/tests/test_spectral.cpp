#include <doctest.h>

#include <cmath>

#include "groklab/rng.hpp"
#include "groklab/spectral.hpp"

using namespace groklab;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Series sine_series(std::size_t n, int bin, double amplitude, double phase) {
  Series s;
  s.values.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    s.values[t] = amplitude * std::sin(kTwoPi * bin * static_cast<double>(t) / static_cast<double>(n) + phase);
  return s;
}

}  // namespace

TEST_CASE("periodogram satisfies Parseval on random series") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 16 + rng.below(500);
    Series s;
    s.values.resize(n);
    for (double& v : s.values) v = rng.gaussian() * 3.0 + 1.0;
    const Periodogram p = periodogram(s);
    double e = 0.0, x2 = 0.0;
    for (double v : p.energy) e += v;
    for (double v : s.values) x2 += v * v;
    CHECK(std::abs(e - x2) / x2 <= 1e-9);
  }
}

TEST_CASE("pure sine concentrates its energy in one bin") {
  const std::size_t n = 512;
  const int k0 = 37;
  const Periodogram p = periodogram(sine_series(n, k0, 2.0, 0.3));
  double total = 0.0;
  for (double v : p.energy) total += v;
  CHECK(p.energy[k0] / total >= 0.99);
}

TEST_CASE("zero series has an all-zero periodogram") {
  Series s;
  s.values.assign(64, 0.0);
  for (double v : periodogram(s).energy) CHECK(v == 0.0);
}

TEST_CASE("moment identities for a bin-aligned sine") {
  const std::size_t n = 4096;
  const int k0 = 410;
  const double w0 = kTwoPi * k0 / static_cast<double>(n);
  const Periodogram p = periodogram(sine_series(n, k0, 1.0, 0.0));
  const double m0 = moment(p, 0), m2 = moment(p, 2), m4 = moment(p, 4);
  CHECK(m2 / m0 == doctest::Approx(w0 * w0).epsilon(1e-6));
  CHECK(m4 / m2 == doctest::Approx(w0 * w0).epsilon(1e-6));
}

TEST_CASE("activity equals time-domain power for zero-mean input") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 32 + rng.below(300);
    Series s;
    s.values.resize(n);
    double mean = 0.0;
    for (double& v : s.values) mean += (v = rng.gaussian());
    mean /= static_cast<double>(n);
    for (double& v : s.values) v -= mean;
    double x2 = 0.0;
    for (double v : s.values) x2 += v * v;
    CHECK(moment(periodogram(s), 0) == doctest::Approx(x2).epsilon(1e-9));
  }
}

TEST_CASE("detrend removes a constant exactly") {
  Series s;
  s.values.assign(256, 41.5);
  const Series out = detrend_lowpass(s, 0.01);
  for (double v : out.values) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("detrend removes a linear ramp") {
  const std::size_t n = 2000;
  Series s;
  s.values.resize(n);
  double rms = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    s.values[t] = static_cast<double>(t);
    rms += s.values[t] * s.values[t];
  }
  rms = std::sqrt(rms / static_cast<double>(n));
  const Series out = detrend_lowpass(s, 0.01);
  double res = 0.0;
  for (double v : out.values) res += v * v;
  res = std::sqrt(res / static_cast<double>(n));
  CHECK(res <= 0.01 * rms);
}

TEST_CASE("detrend keeps an offset sine intact") {
  const std::size_t n = 1000;
  Series s = sine_series(n, 100, 1.0, 0.0);  // frequency 0.1
  for (double& v : s.values) v += 100.0;
  const Series out = detrend_lowpass(s, 0.02);
  double mean = 0.0, peak = 0.0;
  for (double v : out.values) {
    mean += v;
    peak = std::max(peak, std::abs(v));
  }
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean) <= 1e-9);
  CHECK(peak == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("hjorth identities for a pure sine") {
  const std::size_t n = 4096;
  const int k0 = 410;
  const double a = 2.0;
  const double w0 = kTwoPi * k0 / static_cast<double>(n);
  const SpectralSignature sig = hjorth(sine_series(n, k0, a, 0.45), 0.01);
  CHECK(sig.mobility_defined);
  CHECK(sig.complexity_defined);
  CHECK(sig.activity == doctest::Approx(a * a * static_cast<double>(n) / 2.0).epsilon(0.01));
  CHECK(sig.mobility == doctest::Approx(w0).epsilon(0.01));
  CHECK(sig.complexity == doctest::Approx(w0).epsilon(0.01));
}

TEST_CASE("hjorth flags a constant series as undefined") {
  Series s;
  s.values.assign(128, 3.0);
  const SpectralSignature sig = hjorth(s, 0.01);
  CHECK(sig.activity <= 1e-18);
  CHECK_FALSE(sig.mobility_defined);
  CHECK_FALSE(sig.complexity_defined);
}

TEST_CASE("white noise spreads the spectrum: complexity above mobility") {
  Rng rng(123);
  Series s;
  s.values.resize(4096);
  for (double& v : s.values) v = rng.gaussian();
  const SpectralSignature sig = hjorth(s, 0.01);
  CHECK(sig.complexity > sig.mobility);
}

TEST_CASE("scale equivariance and shift invariance") {
  Rng rng(7);
  Series s;
  s.values.resize(1024);
  for (std::size_t t = 0; t < s.values.size(); ++t)
    s.values[t] = rng.gaussian() + std::sin(0.2 * static_cast<double>(t));
  const SpectralSignature base = hjorth(s, 0.01);

  Series scaled = s;
  const double c = 3.7;
  for (double& v : scaled.values) v *= c;
  const SpectralSignature sc = hjorth(scaled, 0.01);
  CHECK(sc.activity == doctest::Approx(c * c * base.activity).epsilon(1e-9));
  CHECK(sc.mobility == doctest::Approx(base.mobility).epsilon(1e-9));
  CHECK(sc.complexity == doctest::Approx(base.complexity).epsilon(1e-9));

  Series shifted = s;
  for (double& v : shifted.values) v += 1234.5;
  const SpectralSignature sh = hjorth(shifted, 0.01);
  CHECK(std::abs(sh.activity - base.activity) / base.activity <= 1e-9);
}

TEST_CASE("m2 approximates the derivative's activity") {
  // smooth low-frequency signal: m2(x) vs m0(dx/dt) with forward differences
  const std::size_t n = 4096;
  Series s;
  s.values.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double x = static_cast<double>(t);
    s.values[t] = std::sin(kTwoPi * 8.0 * x / n) + 0.4 * std::sin(kTwoPi * 21.0 * x / n + 1.0);
  }
  const double m2 = moment(periodogram(s), 2);
  Series diff;
  diff.values.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    diff.values[t] = s.values[(t + 1) % n] - s.values[t];  // periodic forward difference
  const double m0d = moment(periodogram(diff), 0);
  CHECK(m2 == doctest::Approx(m0d).epsilon(0.02));
}

TEST_CASE("grok_score separates oscillatory from smooth decay") {
  const std::size_t n = 400;
  std::vector<double> smooth(n), bursty(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double decay = 4.5 * std::exp(-static_cast<double>(t) / 300.0);
    smooth[t] = decay;
    bursty[t] = decay + std::sin(kTwoPi * 0.11 * static_cast<double>(t)) *
                            (t % 60 < 20 ? 1.0 : 0.05);
  }
  const double lo = grok_score(smooth, 0, 400, 0.02);
  const double hi = grok_score(bursty, 0, 400, 0.02);
  CHECK(hi >= 1e3 * lo);

  CHECK_THROWS_AS(grok_score(smooth, 0, 500, 0.02), RuntimeFault);
}

TEST_CASE("detrend input validation") {
  Series tiny;
  tiny.values.assign(4, 1.0);
  CHECK_THROWS_AS(detrend_lowpass(tiny, 0.01), RuntimeFault);
  Series ok;
  ok.values.assign(64, 1.0);
  CHECK_THROWS_AS(detrend_lowpass(ok, 0.0), RuntimeFault);
  CHECK_THROWS_AS(detrend_lowpass(ok, 0.5), RuntimeFault);
}
