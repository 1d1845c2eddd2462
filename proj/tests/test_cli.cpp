#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "groklab/csv.hpp"
#include "groklab/experiment.hpp"
#include "groklab/rng.hpp"

using namespace groklab;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.task.op = OpKind::mod_add;
  cfg.task.p = 7;
  cfg.task.q = 7;
  cfg.task.r = 0.5;
  cfg.task.seed = 0;
  cfg.arch = Arch::mlp;
  cfg.width = 8;
  cfg.optimizer.algo = Algo::adamw;
  cfg.optimizer.lr = 3e-3;
  cfg.schedule.base_lr = 3e-3;
  cfg.optimizer.weight_decay = 0.5;
  cfg.budget_steps = 60;
  cfg.checkpoint_stride = 10;
  cfg.analysis.spectral_window_end = 60;
  cfg.analysis.spectral_cutoff = 0.05;
  cfg.analysis.curvature_stride = 20;
  cfg.analysis.id_stride = 30;
  cfg.analysis.alpha_points = 11;
  return cfg;
}

std::string temp_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("groklab_cli_" + tag);
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig random_config(Rng& rng) {
  RunConfig cfg = tiny_config();
  cfg.task.p = cfg.task.q = 5 + static_cast<int>(rng.below(90));
  cfg.task.r = rng.uniform(0.1, 0.9);
  cfg.task.seed = rng.below(1 << 20);
  cfg.arch = rng.below(2) ? Arch::mlp : Arch::transformer;
  cfg.heads = 2;
  cfg.width = 2 * (1 + static_cast<int>(rng.below(32)));
  cfg.depth = 1 + static_cast<int>(rng.below(3));
  cfg.optimizer.lr = std::pow(10.0, rng.uniform(-5, -1));
  cfg.optimizer.weight_decay = rng.uniform(0.0, 2.0);
  cfg.optimizer.beta2 = rng.uniform(0.9, 0.999);
  cfg.schedule.base_lr = cfg.optimizer.lr;
  cfg.schedule.warmup_steps = static_cast<int>(rng.below(20));
  cfg.clip.enabled = rng.below(2) != 0;
  cfg.clip.eta = rng.uniform(0.01, 2.0);
  cfg.budget_steps = static_cast<long long>(rng.below(5000));
  cfg.analysis.spectral_cutoff = rng.uniform(0.001, 0.49);
  cfg.analysis.id_k = 2 + static_cast<int>(rng.below(6));
  return cfg;
}

}  // namespace

TEST_CASE("config round-trips losslessly") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const RunConfig cfg = random_config(rng);
    const std::string once = serialize_config(cfg);
    const RunConfig back = parse_config(once);
    CHECK(serialize_config(back) == once);
    CHECK(config_hash(back) == config_hash(cfg));
  }
}

TEST_CASE("config validation names the field path") {
  RunConfig cfg = tiny_config();
  std::string text = serialize_config(cfg);
  const auto pos = text.find("\"r\": 0.5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 8, "\"r\": 1.5");
  try {
    parse_config(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("task.r") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);
}

TEST_CASE("train writes the run directory and refuses overwrites") {
  const std::string dir = temp_dir("train");
  const RunConfig cfg = tiny_config();
  const TrainResult res = cmd_train(cfg, dir, false);
  const ExperimentPaths paths{dir};
  CHECK(fs::exists(paths.config_json()));
  CHECK(fs::exists(paths.metrics_csv()));
  CHECK(fs::exists(paths.layout_json()));
  CHECK(read_csv(paths.metrics_csv()).rows.size() == 60);
  CHECK(res.trace.rows.size() == 60);

  CHECK_THROWS_AS(cmd_train(cfg, dir, false), ConfigError);
  CHECK_NOTHROW(cmd_train(cfg, dir, true));

  // the stored config reproduces the run
  const RunConfig reread = load_config(paths.config_json());
  CHECK(serialize_config(reread) == serialize_config(cfg));
  fs::remove_all(dir);
}

TEST_CASE("analysis passes are idempotent and self-consumable") {
  const std::string dir = temp_dir("analyze");
  cmd_train(tiny_config(), dir, false);
  const ExperimentPaths paths{dir};

  analyze_spectral(paths);
  analyze_phases(paths);
  analyze_curvature(paths);
  analyze_pca(paths);
  analyze_id(paths);
  AnalyzeOverrides ov;
  ov.max_anchors = 3;
  analyze_landscape(paths, ov);

  for (const std::string& f : {paths.spectral_csv(), paths.curvature_csv(), paths.pca_csv(),
                               paths.id_csv(), paths.phases_json()})
    CHECK(fs::exists(f));
  CHECK(fs::exists(paths.slices_dir()));

  // byte-identical on rerun
  const std::string spectral_once = slurp(paths.spectral_csv());
  const std::string pca_once = slurp(paths.pca_csv());
  const std::string curvature_once = slurp(paths.curvature_csv());
  analyze_spectral(paths);
  analyze_pca(paths);
  analyze_curvature(paths);
  CHECK(slurp(paths.spectral_csv()) == spectral_once);
  CHECK(slurp(paths.pca_csv()) == pca_once);
  CHECK(slurp(paths.curvature_csv()) == curvature_once);

  // metrics.csv is never touched by analysis
  const std::string metrics_before = slurp(paths.metrics_csv());
  analyze_spectral(paths);
  CHECK(slurp(paths.metrics_csv()) == metrics_before);

  // every CSV parses back through the shared reader
  for (const std::string& f :
       {paths.spectral_csv(), paths.curvature_csv(), paths.pca_csv(), paths.id_csv()}) {
    const CsvTable t = read_csv(f);
    CHECK_FALSE(t.columns.empty());
    CHECK_FALSE(t.rows.empty());
  }

  // 1D slice files carry the expected grid
  int slice_files = 0;
  for (const auto& entry : fs::directory_iterator(paths.slices_dir())) {
    const CsvTable t = read_csv(entry.path().string());
    CHECK(t.rows.size() == 11);
    ++slice_files;
  }
  CHECK(slice_files >= 1);

  fs::remove_all(dir);
}

TEST_CASE("plots are rendered from the analysis outputs") {
  const std::string dir = temp_dir("plots");
  cmd_train(tiny_config(), dir, false);
  const ExperimentPaths paths{dir};
  analyze_curvature(paths);
  analyze_pca(paths);
  AnalyzeOverrides ov;
  ov.max_anchors = 2;
  analyze_landscape(paths, ov);

  for (FigureKind kind : {FigureKind::learning_curve, FigureKind::slice, FigureKind::condition,
                          FigureKind::pca}) {
    const auto files = cmd_plot(paths, kind);
    CHECK_FALSE(files.empty());
    for (const auto& f : files) {
      const std::string svg = slurp(f);
      CHECK(svg.rfind("<svg", 0) == 0);
      CHECK(svg.find("</svg>") != std::string::npos);
    }
  }
  // missing input is an explicit error
  CHECK_THROWS_AS(cmd_plot(paths, FigureKind::heatmap), RuntimeFault);
  fs::remove_all(dir);
}

TEST_CASE("fit-t4 runs over a directory of runs") {
  const std::string parent = temp_dir("fit");
  fs::create_directories(parent);
  // three tiny runs at increasing data fractions; all grok quickly at p=7
  int made = 0;
  for (double r : {0.4, 0.55, 0.7}) {
    RunConfig cfg = tiny_config();
    cfg.task.r = r;
    cfg.budget_steps = 900;
    cfg.checkpoint_stride = 0;
    cfg.analysis.val_threshold = 0.99;
    const std::string sub = parent + "/r" + std::to_string(static_cast<int>(r * 100));
    const TrainResult res = cmd_train(cfg, sub, false);
    if (res.phases.t4) ++made;
  }
  if (made >= 3) {
    const PowerLawFit fit = analyze_fit_t4(parent);
    CHECK(fs::exists(fs::path(parent) / "powerlaw.json"));
    CHECK(fit.gamma > 0.0);
  }
  fs::remove_all(parent);
}

TEST_CASE("error json lands next to a failing run") {
  const std::string dir = temp_dir("fail");
  RunConfig cfg = tiny_config();
  cfg.optimizer.lr = 1e200;  // overflows the forward pass almost immediately
  cfg.schedule.base_lr = 1e200;
  cfg.budget_steps = 200;
  CHECK_THROWS(cmd_train(cfg, dir, false));
  CHECK(fs::exists(ExperimentPaths{dir}.error_json()));
  fs::remove_all(dir);
}
