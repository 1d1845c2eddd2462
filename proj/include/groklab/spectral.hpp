#pragma once

#include <cstdint>
#include <vector>

#include "groklab/common.hpp"

namespace groklab {

struct Series {
  std::vector<double> values;
  double dt = 1.0;  // one training step
};

// One-sided energy spectral density, normalized so that the energies sum to
// the time-domain sum of squares (discrete Parseval). omega holds angular
// frequencies 2*pi*k/N.
struct Periodogram {
  std::vector<double> omega;
  std::vector<double> energy;
};

struct SpectralSignature {
  double m0 = 0.0, m2 = 0.0, m4 = 0.0;
  double activity = 0.0;    // m0
  double mobility = 0.0;    // sqrt(m2/m0)
  double complexity = 0.0;  // sqrt(m4/m2)
  bool mobility_defined = false;
  bool complexity_defined = false;
  long long window_start = 0, window_end = 0;
  double cutoff = 0.0;
};

// Removes trend/offset content below cutoff_fraction (fraction of the sample
// rate, 0 < cutoff < 0.5) and returns a zero-mean residual. The series is
// mirror-extended before the frequency-domain masking so that ramps and other
// non-periodic trends do not leak back in through the wrap-around
// discontinuity.
Series detrend_lowpass(const Series& s, double cutoff_fraction);

Periodogram periodogram(const Series& s);

// n-th spectral moment, sum_k omega_k^n * energy_k
double moment(const Periodogram& p, int n);

SpectralSignature hjorth(const Series& s, double cutoff_fraction);

// Activity of the detrended loss over [window_start, window_end); the
// early-window grokking predictor compared across hyperparameter cells.
double grok_score(const std::vector<double>& train_loss, long long window_start,
                  long long window_end, double cutoff_fraction, bool log_loss = false);

}  // namespace groklab
