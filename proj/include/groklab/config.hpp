#pragma once

#include <cstdint>
#include <string>

#include "groklab/dataset.hpp"
#include "groklab/model.hpp"
#include "groklab/optim.hpp"

namespace groklab {

struct TaskConfig {
  OpKind op = OpKind::mod_add;
  int p = 97;
  int q = 97;
  bool symmetric = false;
  double r = 0.5;
  std::uint64_t seed = 0;
};

struct AnalysisConfig {
  long long spectral_window_start = 0;
  long long spectral_window_end = 400;
  double spectral_cutoff = 0.01;
  bool spectral_log_loss = false;
  double alpha_min = -3.0;
  double alpha_max = 3.0;
  int alpha_points = 201;
  double beta_min = -1.0;
  double beta_max = 2.0;
  int beta_points = 101;
  long long curvature_stride = 100;
  double curvature_tol = 1e-4;
  int curvature_max_iter = 400;
  std::string id_method = "mle_inverse";  // mle_mean | mle_inverse | twonn
  int id_k = 2;
  double id_discard = 0.1;
  int id_position = -1;  // token position for activation clouds, -1 = final
  long long id_stride = 100;
  double train_threshold = 1.0;  // phase detection
  double val_threshold = 1.0;
};

struct RunConfig {
  TaskConfig task;
  Arch arch = Arch::transformer;
  int width = 128;
  int depth = 2;
  int heads = 4;
  OptimizerConfig optimizer;
  Schedule schedule;
  ClipConfig clip;
  long long budget_steps = 10000;
  long long checkpoint_stride = 10;
  AnalysisConfig analysis;

  // vocab/answer sizes and context length come from the task
  ModelConfig model_config() const;
  void validate() const;  // throws ConfigError naming the offending field path
};

std::string serialize_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace groklab
