#include "groklab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

namespace groklab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// FFTW plan creation is not thread-safe; execution of distinct plans is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> real_fft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::vector<double> in(x);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> real_ifft(std::vector<std::complex<double>> spec, std::size_t n) {
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
  return out;
}

void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw RuntimeFault("series contains non-finite values");
}

}  // namespace

Series detrend_lowpass(const Series& s, double cutoff_fraction) {
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 0.5))
    throw RuntimeFault("detrend: cutoff_fraction must be in (0, 0.5)");
  const std::size_t n = s.values.size();
  if (n < 8) throw RuntimeFault("detrend: series too short (< 8 samples)");
  check_finite(s.values);

  // even (mirror) extension to length 2n
  const std::size_t m = 2 * n;
  std::vector<double> ext(m);
  for (std::size_t i = 0; i < n; ++i) {
    ext[i] = s.values[i];
    ext[m - 1 - i] = s.values[i];
  }
  auto spec = real_fft(ext);
  const std::size_t k_cut = static_cast<std::size_t>(std::floor(cutoff_fraction * static_cast<double>(m)));
  for (std::size_t k = 0; k <= k_cut && k < spec.size(); ++k) spec[k] = 0.0;
  auto filtered = real_ifft(std::move(spec), m);

  Series out;
  out.dt = s.dt;
  out.values.assign(filtered.begin(), filtered.begin() + static_cast<std::ptrdiff_t>(n));
  double mean = 0.0;
  for (double v : out.values) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : out.values) v -= mean;
  return out;
}

Periodogram periodogram(const Series& s) {
  const std::size_t n = s.values.size();
  if (n < 2) throw RuntimeFault("periodogram: series too short");
  check_finite(s.values);
  auto spec = real_fft(s.values);
  Periodogram p;
  p.omega.resize(spec.size());
  p.energy.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    p.omega[k] = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    const bool self_conjugate = (k == 0) || (n % 2 == 0 && k == n / 2);
    const double w = self_conjugate ? 1.0 : 2.0;
    p.energy[k] = w * std::norm(spec[k]) / static_cast<double>(n);
  }
  return p;
}

double moment(const Periodogram& p, int n) {
  if (n != 0 && n != 2 && n != 4) throw RuntimeFault("moment: n must be 0, 2 or 4");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.energy.size(); ++k) {
    double w = 1.0;
    for (int j = 0; j < n; ++j) w *= p.omega[k];
    acc += w * p.energy[k];
  }
  return acc;
}

SpectralSignature hjorth(const Series& s, double cutoff_fraction) {
  const Series det = detrend_lowpass(s, cutoff_fraction);
  const Periodogram p = periodogram(det);
  SpectralSignature sig;
  sig.cutoff = cutoff_fraction;
  sig.window_end = static_cast<long long>(s.values.size());
  sig.m0 = moment(p, 0);
  sig.m2 = moment(p, 2);
  sig.m4 = moment(p, 4);
  sig.activity = sig.m0;
  if (sig.m0 > 0.0) {
    sig.mobility = std::sqrt(sig.m2 / sig.m0);
    sig.mobility_defined = true;
  }
  if (sig.m2 > 0.0) {
    sig.complexity = std::sqrt(sig.m4 / sig.m2);
    sig.complexity_defined = true;
  }
  return sig;
}

double grok_score(const std::vector<double>& train_loss, long long window_start,
                  long long window_end, double cutoff_fraction, bool log_loss) {
  if (window_start < 0 || window_end <= window_start ||
      static_cast<std::size_t>(window_end) > train_loss.size())
    throw RuntimeFault("grok_score: trace shorter than the requested window");
  Series s;
  s.values.assign(train_loss.begin() + window_start, train_loss.begin() + window_end);
  if (log_loss)
    for (double& v : s.values) v = std::log(v);
  SpectralSignature sig = hjorth(s, cutoff_fraction);
  return sig.activity;
}

}  // namespace groklab
