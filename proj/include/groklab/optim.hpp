#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "groklab/common.hpp"

namespace groklab {

enum class Algo { sgd, momentum, rmsprop, rprop, adam, adamax, adamw };

const char* algo_name(Algo a);
Algo algo_from_name(const std::string& s);

struct OptimizerConfig {
  Algo algo = Algo::adamw;
  double lr = 1e-4;
  double weight_decay = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double momentum = 0.9;
  double rmsprop_alpha = 0.99;
  double rprop_eta_plus = 1.2;
  double rprop_eta_minus = 0.5;
  double rprop_step_min = 1e-6;
  double rprop_step_max = 50.0;
  // AdamW decays every parameter by default, embeddings included.
  bool decay_embeddings = true;

  void validate(const std::string& path_prefix = "optimizer") const;
};

struct Schedule {
  int warmup_steps = 10;
  double base_lr = 1e-4;
};

// base_lr * min(1, t / warmup_steps); constant once the ramp is done
double lr_at(const Schedule& s, long long t);

struct ClipConfig {
  bool enabled = false;
  double eta = 1.0;
};

// grad *= min(1, eta / ||grad||); returns the pre-clip norm. A zero gradient
// passes through unchanged.
double clip_grad_norm(Span grad, double eta);

// Per-run optimizer state. One training loop owns one instance and calls
// step() sequentially; the step counter advances by exactly one per call.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, std::size_t n_params);

  // mask[i] == 0 exempts parameter i from weight decay
  void set_decay_mask(std::vector<std::uint8_t> mask);

  // One update with the given effective learning rate. Throws RuntimeFault on
  // non-finite gradient components instead of propagating NaNs.
  void step(Span params, ConstSpan grad, double lr);

  long long steps_taken() const { return t_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::size_t n_;
  long long t_ = 0;
  std::vector<double> m_, v_;            // first/second moments or momentum buffer
  std::vector<double> rprop_step_, prev_grad_;
  std::vector<std::uint8_t> decay_mask_;  // empty = decay everything
};

}  // namespace groklab
