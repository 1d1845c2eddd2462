#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groklab/config.hpp"
#include "groklab/harness.hpp"
#include "groklab/landscape.hpp"

namespace groklab {

// Layout of one run directory:
//   config.json  metrics.csv  layout.json  checkpoints/step_{t}.bin
//   spectral.csv periodogram.csv curvature.csv pca.csv id.csv phases.json
//   slices/slice_{kind}_{step}.csv  powerlaw.json  plots/*.svg  error.json
struct ExperimentPaths {
  std::string root;

  std::string config_json() const;
  std::string metrics_csv() const;
  std::string layout_json() const;
  std::string checkpoints_dir() const;
  std::string checkpoint_bin(long long step) const;
  std::string spectral_csv() const;
  std::string periodogram_csv() const;
  std::string curvature_csv() const;
  std::string pca_csv() const;
  std::string id_csv() const;
  std::string phases_json() const;
  std::string slices_dir() const;
  std::string slice_csv(const std::string& kind, long long step) const;
  std::string powerlaw_json() const;
  std::string sweep_csv() const;
  std::string plots_dir() const;
  std::string error_json() const;
};

// Runs training into out_dir; refuses an existing run without force. The
// config is written before the first step; failures leave error.json behind.
TrainResult cmd_train(const RunConfig& cfg, const std::string& out_dir, bool force);

struct AnalyzeOverrides {
  std::optional<long long> window_start, window_end;
  std::optional<double> cutoff;
  std::optional<double> alpha_min, alpha_max;
  std::optional<int> alpha_points;
  DirectionKind slice_kind = DirectionKind::to_optimum;
  std::uint64_t direction_seed = 0;
  int max_anchors = 8;
};

void analyze_spectral(const ExperimentPaths& dir, const AnalyzeOverrides& ov = {});
void analyze_phases(const ExperimentPaths& dir);
void analyze_landscape(const ExperimentPaths& dir, const AnalyzeOverrides& ov = {});
void analyze_curvature(const ExperimentPaths& dir);
void analyze_pca(const ExperimentPaths& dir);
void analyze_id(const ExperimentPaths& dir);

// Fits t4(r) over a directory of finished runs (each subdirectory holding
// config.json + metrics.csv); writes powerlaw.json into the parent.
PowerLawFit analyze_fit_t4(const std::string& runs_parent_dir);

enum class FigureKind { learning_curve, heatmap, slice, condition, pca };
FigureKind figure_from_name(const std::string& s);

// Renders one figure kind into plots/; returns the files written.
std::vector<std::string> cmd_plot(const ExperimentPaths& dir, FigureKind kind);

// Checkpoint access shared by the analysis passes.
struct CheckpointSet {
  std::shared_ptr<const ParamLayout> layout;
  std::vector<long long> steps;             // ascending
  std::vector<std::vector<double>> values;  // aligned with steps
};
CheckpointSet load_checkpoints(const ExperimentPaths& dir);

void write_error_json(const std::string& path, const std::string& message);

}  // namespace groklab
