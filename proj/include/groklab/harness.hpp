#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groklab/config.hpp"
#include "groklab/param_vector.hpp"

namespace groklab {

struct TraceRow {
  long long step = 0;
  double train_loss = 0, val_loss = 0;
  double train_acc = 0, val_acc = 0;
  double grad_norm = 0;  // pre-clip ||G_t||
  double lr = 0;         // rate actually used for the update at this step
  double cos_prev = 0;   // cos(theta_t, theta_{t+1})
  double cos_init = 0;   // cos(theta_t, theta_0)
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::vector<double> train_loss_series() const;
};

struct PhaseMarks {
  std::optional<long long> t1, t2, t3, t4;
};

struct PhaseThresholds {
  double train_threshold = 1.0;
  double val_threshold = 1.0;
  double train_chance = 0.0;  // "above zero" level for t1
  double val_chance = 0.0;    // and for t3
};

// Chance-level accuracy plus two binomial standard deviations; random argmax
// over q classes occasionally exceeds literal zero, so first-learning marks
// use this instead.
double chance_level(int q, long long n_samples);

// First-crossing steps: t1/t3 = accuracy above chance, t2/t4 = accuracy at
// threshold. Absent when never reached.
PhaseMarks detect_phases(const TrainTrace& trace, const PhaseThresholds& th);

struct PowerLawFit {
  double a = 0, gamma = 0, b = 0;
  double residual_rms = 0;
  bool converged = false;
  bool gamma_identifiable = true;
  double r_min = 0, r_max = 0;
  std::vector<std::pair<double, double>> points;  // (r, t4)

  double eval(double r) const;
};

// Nonlinear least squares for t4(r) = a * r^-gamma + b: gamma grid search
// with linear (a, b) solves, then Levenberg-Marquardt refinement. The model
// is badly conditioned, hence the staged start.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct StopRule {
  long long max_steps = 0;
  bool out_of_fitted_domain = false;  // r below the fitted range; law collapses as r -> 0
};

StopRule stop_rule(const PowerLawFit& fit, double r, long long epsilon = 1000);

struct TrainResult {
  TrainTrace trace;
  PhaseMarks phases;
  ParamVector final_params;
  std::vector<long long> checkpoint_steps;
};

// Full-batch training. When checkpoint_dir is non-empty, parameters are
// saved there as step_{t}.bin (layout.json alongside) at the configured
// stride, at detected phase transitions, at step 0 and after the last
// update. metrics_csv likewise optional.
TrainResult train(const RunConfig& cfg, const std::string& checkpoint_dir = "",
                  const std::string& metrics_csv = "");

struct SweepCell {
  double lr = 0, weight_decay = 0, r = 0;
  std::uint64_t seed = 0;
};

struct RunSummary {
  SweepCell cell;
  std::uint64_t config_hash = 0;
  double final_val_acc = 0;
  PhaseMarks phases;
  double activity = 0;  // early-window spectral activity of the train loss
  bool grokked = false;
  bool failed = false;
  std::string error;
};

// Independent runs over the grid, row-major in (lr, wd, r, seed) order.
// Individual failures are recorded per cell and the sweep continues.
std::vector<RunSummary> sweep(const RunConfig& base, const std::vector<double>& lrs,
                              const std::vector<double>& wds, const std::vector<double>& rs,
                              const std::vector<std::uint64_t>& seeds, int workers,
                              const std::string& csv_path = "");

void write_sweep_csv(const std::vector<RunSummary>& cells, const std::string& path);

}  // namespace groklab
