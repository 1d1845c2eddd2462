#include "groklab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "groklab/csv.hpp"
#include "groklab/curvature.hpp"
#include "groklab/intrinsic_dim.hpp"
#include "groklab/spectral.hpp"
#include "groklab/svgplot.hpp"

namespace groklab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ExperimentPaths::config_json() const { return (fs::path(root) / "config.json").string(); }
std::string ExperimentPaths::metrics_csv() const { return (fs::path(root) / "metrics.csv").string(); }
std::string ExperimentPaths::layout_json() const {
  return (fs::path(root) / "checkpoints" / "layout.json").string();
}
std::string ExperimentPaths::checkpoints_dir() const {
  return (fs::path(root) / "checkpoints").string();
}
std::string ExperimentPaths::checkpoint_bin(long long step) const {
  return (fs::path(checkpoints_dir()) / ("step_" + std::to_string(step) + ".bin")).string();
}
std::string ExperimentPaths::spectral_csv() const { return (fs::path(root) / "spectral.csv").string(); }
std::string ExperimentPaths::periodogram_csv() const {
  return (fs::path(root) / "periodogram.csv").string();
}
std::string ExperimentPaths::curvature_csv() const {
  return (fs::path(root) / "curvature.csv").string();
}
std::string ExperimentPaths::pca_csv() const { return (fs::path(root) / "pca.csv").string(); }
std::string ExperimentPaths::id_csv() const { return (fs::path(root) / "id.csv").string(); }
std::string ExperimentPaths::phases_json() const { return (fs::path(root) / "phases.json").string(); }
std::string ExperimentPaths::slices_dir() const { return (fs::path(root) / "slices").string(); }
std::string ExperimentPaths::slice_csv(const std::string& kind, long long step) const {
  return (fs::path(slices_dir()) / ("slice_" + kind + "_" + std::to_string(step) + ".csv"))
      .string();
}
std::string ExperimentPaths::powerlaw_json() const {
  return (fs::path(root) / "powerlaw.json").string();
}
std::string ExperimentPaths::sweep_csv() const { return (fs::path(root) / "sweep.csv").string(); }
std::string ExperimentPaths::plots_dir() const { return (fs::path(root) / "plots").string(); }
std::string ExperimentPaths::error_json() const { return (fs::path(root) / "error.json").string(); }

void write_error_json(const std::string& path, const std::string& message) {
  json j;
  j["error"] = message;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

TrainResult cmd_train(const RunConfig& cfg, const std::string& out_dir, bool force) {
  cfg.validate();
  const ExperimentPaths dir{out_dir};
  if (fs::exists(dir.config_json()) && !force)
    throw ConfigError("refusing to overwrite existing run at " + out_dir +
                      " (use --force to override)");
  fs::create_directories(out_dir);
  fs::remove(dir.error_json());
  save_config(cfg, dir.config_json());
  try {
    return train(cfg, dir.checkpoints_dir(), dir.metrics_csv());
  } catch (const std::exception& e) {
    write_error_json(dir.error_json(), e.what());
    throw;
  }
}

namespace {

TrainTrace load_trace(const ExperimentPaths& dir) {
  const CsvTable t = read_csv(dir.metrics_csv());
  TrainTrace trace;
  const int c_step = t.col("step"), c_tl = t.col("train_loss"), c_vl = t.col("val_loss");
  const int c_ta = t.col("train_acc"), c_va = t.col("val_acc"), c_gn = t.col("grad_norm");
  const int c_lr = t.col("lr"), c_cp = t.col("cos_prev"), c_ci = t.col("cos_init");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    TraceRow r;
    r.step = static_cast<long long>(t.num(i, c_step));
    r.train_loss = t.num(i, c_tl);
    r.val_loss = t.num(i, c_vl);
    r.train_acc = t.num(i, c_ta);
    r.val_acc = t.num(i, c_va);
    r.grad_norm = t.num(i, c_gn);
    r.lr = t.num(i, c_lr);
    r.cos_prev = t.num(i, c_cp);
    r.cos_init = t.num(i, c_ci);
    trace.rows.push_back(r);
  }
  return trace;
}

struct RunContext {
  RunConfig cfg;
  Dataset ds;
  Batch train_batch, val_batch;
  Model model;

  explicit RunContext(const RunConfig& c)
      : cfg(c),
        ds(build_dataset(c.task.op, c.task.p, c.task.q, c.task.symmetric)),
        train_batch(),
        val_batch(),
        model(c.model_config()) {
    const Split sp = make_split(ds, c.task.r, c.task.seed);
    train_batch = batch_encode(sp.train, ds);
    val_batch = batch_encode(sp.val, ds);
  }
};

PhaseThresholds thresholds_for(const RunContext& ctx) {
  PhaseThresholds th;
  th.train_threshold = ctx.cfg.analysis.train_threshold;
  th.val_threshold = ctx.cfg.analysis.val_threshold;
  th.train_chance = chance_level(ctx.cfg.task.q, ctx.train_batch.n);
  th.val_chance = chance_level(ctx.cfg.task.q, ctx.val_batch.n);
  return th;
}

std::vector<std::size_t> thin_indices(std::size_t n, std::size_t max_count) {
  std::vector<std::size_t> keep;
  if (n <= max_count) {
    for (std::size_t i = 0; i < n; ++i) keep.push_back(i);
    return keep;
  }
  for (std::size_t i = 0; i < max_count; ++i)
    keep.push_back(i * (n - 1) / (max_count - 1));
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  return keep;
}

}  // namespace

CheckpointSet load_checkpoints(const ExperimentPaths& dir) {
  CheckpointSet set;
  if (!fs::exists(dir.layout_json()))
    throw RuntimeFault("no checkpoints found: missing " + dir.layout_json());
  set.layout = read_layout_json(dir.layout_json());
  std::vector<long long> steps;
  for (const auto& entry : fs::directory_iterator(dir.checkpoints_dir())) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step_", 0) == 0 && name.size() > 9 &&
        name.substr(name.size() - 4) == ".bin")
      steps.push_back(std::stoll(name.substr(5, name.size() - 9)));
  }
  std::sort(steps.begin(), steps.end());
  for (long long s : steps) {
    set.values.push_back(load_checkpoint(dir.checkpoint_bin(s), set.layout->total));
    set.steps.push_back(s);
  }
  if (set.steps.empty()) throw RuntimeFault("no checkpoints found in " + dir.checkpoints_dir());
  return set;
}

void analyze_spectral(const ExperimentPaths& dir, const AnalyzeOverrides& ov) {
  const RunConfig cfg = load_config(dir.config_json());
  const TrainTrace trace = load_trace(dir);
  const auto loss = trace.train_loss_series();
  const long long start = ov.window_start.value_or(cfg.analysis.spectral_window_start);
  long long end = ov.window_end.value_or(cfg.analysis.spectral_window_end);
  end = std::min<long long>(end, static_cast<long long>(loss.size()));
  const double cutoff = ov.cutoff.value_or(cfg.analysis.spectral_cutoff);
  if (end - start < 8)
    throw RuntimeFault("spectral: trace shorter than the analysis window");

  Series s;
  s.values.assign(loss.begin() + start, loss.begin() + end);
  if (cfg.analysis.spectral_log_loss)
    for (double& v : s.values) v = std::log(v);
  const SpectralSignature sig = hjorth(s, cutoff);

  {
    CsvWriter w(dir.spectral_csv());
    w.header({"window_start", "window_end", "cutoff", "activity", "mobility", "complexity"});
    w.field(start);
    w.field(end);
    w.field(cutoff);
    w.field(sig.activity);
    w.field(sig.mobility_defined ? format_double(sig.mobility) : std::string());
    w.field(sig.complexity_defined ? format_double(sig.complexity) : std::string());
    w.end_row();
  }
  {
    const Periodogram p = periodogram(detrend_lowpass(s, cutoff));
    CsvWriter w(dir.periodogram_csv());
    w.header({"omega", "energy"});
    for (std::size_t k = 0; k < p.omega.size(); ++k) {
      w.field(p.omega[k]);
      w.field(p.energy[k]);
      w.end_row();
    }
  }
}

void analyze_phases(const ExperimentPaths& dir) {
  const RunConfig cfg = load_config(dir.config_json());
  const RunContext ctx(cfg);
  const TrainTrace trace = load_trace(dir);
  if (trace.rows.empty()) throw RuntimeFault("phases: empty metrics trace");
  const PhaseMarks marks = detect_phases(trace, thresholds_for(ctx));
  json j;
  auto put = [&](const char* name, const std::optional<long long>& v) {
    if (v)
      j[name] = *v;
    else
      j[name] = nullptr;
  };
  put("t1", marks.t1);
  put("t2", marks.t2);
  put("t3", marks.t3);
  put("t4", marks.t4);
  std::ofstream out(dir.phases_json());
  out << j.dump(2) << "\n";
}

namespace {

MetricFn metric_fn(const RunContext& ctx) {
  return [&ctx](ConstSpan theta) {
    SlicePoint p;
    const LossReport tr = ctx.model.forward_loss(theta, ctx.train_batch);
    const LossReport vr = ctx.model.forward_loss(theta, ctx.val_batch);
    p.train_loss = tr.loss;
    p.train_acc = tr.accuracy;
    p.val_loss = vr.loss;
    p.val_acc = vr.accuracy;
    return p;
  };
}

void write_slice_csv(const std::string& path, const LandscapeSlice& slice) {
  CsvWriter w(path);
  const bool two_d = !slice.betas.empty();
  if (two_d)
    w.header({"alpha", "beta", "train_loss", "val_loss", "train_acc", "val_acc"});
  else
    w.header({"alpha", "train_loss", "val_loss", "train_acc", "val_acc"});
  std::size_t idx = 0;
  for (std::size_t ai = 0; ai < slice.alphas.size(); ++ai) {
    const std::size_t inner = two_d ? slice.betas.size() : 1;
    for (std::size_t bi = 0; bi < inner; ++bi, ++idx) {
      w.field(slice.alphas[ai]);
      if (two_d) w.field(slice.betas[bi]);
      const SlicePoint& p = slice.points[idx];
      w.field(p.train_loss);
      w.field(p.val_loss);
      w.field(p.train_acc);
      w.field(p.val_acc);
      w.end_row();
    }
  }
}

}  // namespace

void analyze_landscape(const ExperimentPaths& dir, const AnalyzeOverrides& ov) {
  const RunConfig cfg = load_config(dir.config_json());
  const RunContext ctx(cfg);
  const CheckpointSet set = load_checkpoints(dir);
  fs::create_directories(dir.slices_dir());

  std::vector<double> alphas =
      linspace(ov.alpha_min.value_or(cfg.analysis.alpha_min),
               ov.alpha_max.value_or(cfg.analysis.alpha_max),
               ov.alpha_points.value_or(cfg.analysis.alpha_points));
  const MetricFn eval = metric_fn(ctx);

  const auto anchors = thin_indices(set.steps.size(), static_cast<std::size_t>(ov.max_anchors));
  for (std::size_t ai : anchors) {
    ParamVector anchor;
    anchor.layout = set.layout;
    anchor.values = set.values[ai];

    Direction raw;
    const DirectionKind kind = ov.slice_kind;
    try {
      switch (kind) {
        case DirectionKind::to_optimum:
          if (ai + 1 == set.steps.size())
            throw RuntimeFault("anchor is the final checkpoint");
          raw = make_direction(kind, anchor, set.values.back());
          break;
        case DirectionKind::to_init:
          if (ai == 0) throw RuntimeFault("anchor is the initial checkpoint");
          raw = make_direction(kind, anchor, set.values.front());
          break;
        case DirectionKind::next_step: {
          if (ai + 1 >= set.steps.size())
            throw RuntimeFault("no later checkpoint for next_step");
          raw = make_direction(kind, anchor, set.values[ai + 1]);
          break;
        }
        case DirectionKind::random:
          raw = make_direction(kind, anchor, {}, ov.direction_seed);
          break;
      }
    } catch (const RuntimeFault&) {
      continue;  // skip anchors that cannot form this direction
    }
    raw.anchor_step = set.steps[ai];
    const Direction dir_n = filter_normalize(raw, anchor);
    const LandscapeSlice slice = slice_1d(anchor, dir_n, alphas, eval);
    write_slice_csv(dir.slice_csv(direction_kind_name(kind), set.steps[ai]), slice);
  }
}

void analyze_curvature(const ExperimentPaths& dir) {
  const RunConfig cfg = load_config(dir.config_json());
  const RunContext ctx(cfg);
  const CheckpointSet set = load_checkpoints(dir);

  CsvWriter w(dir.curvature_csv());
  w.header({"step", "lambda_max", "lambda_min", "paper_condition", "converged_max",
            "converged_min"});
  const long long stride = std::max<long long>(1, cfg.analysis.curvature_stride);
  for (std::size_t i = 0; i < set.steps.size(); ++i) {
    const long long step = set.steps[i];
    const bool last = i + 1 == set.steps.size();
    if (step % stride != 0 && !last) continue;
    ConstSpan theta(set.values[i]);
    HvpFn hvp = [&](ConstSpan v, Span out) { ctx.model.hvp(theta, ctx.train_batch, v, out); };
    const CurvatureEstimate est = extremal_eigs(hvp, set.layout->total, cfg.analysis.curvature_tol,
                                                cfg.analysis.curvature_max_iter);
    w.field(step);
    w.field(est.lambda_max);
    w.field(est.lambda_min);
    w.field(est.condition_defined() ? format_double(est.paper_condition()) : std::string());
    w.field(static_cast<long long>(est.converged_max));
    w.field(static_cast<long long>(est.converged_min));
    w.end_row();
  }
}

void analyze_pca(const ExperimentPaths& dir) {
  const CheckpointSet set = load_checkpoints(dir);
  std::vector<ConstSpan> views;
  for (const auto& v : set.values) views.emplace_back(v);
  const TrajectoryPCA pca = pca_trajectory(views, set.steps);
  CsvWriter w(dir.pca_csv());
  w.comment("explained_variance_ratio=" + format_double(pca.explained1) + "," +
            format_double(pca.explained2));
  w.header({"step", "alpha", "beta"});
  for (std::size_t i = 0; i < pca.steps.size(); ++i) {
    w.field(pca.steps[i]);
    w.field(pca.alpha[i]);
    w.field(pca.beta[i]);
    w.end_row();
  }
}

void analyze_id(const ExperimentPaths& dir) {
  const RunConfig cfg = load_config(dir.config_json());
  const RunContext ctx(cfg);
  const CheckpointSet set = load_checkpoints(dir);
  const IdMethod method = id_method_from_name(cfg.analysis.id_method);

  CsvWriter w(dir.id_csv());
  w.header({"step", "layer", "split", "method", "k", "value", "n_used"});
  const long long stride = std::max<long long>(1, cfg.analysis.id_stride);
  for (std::size_t i = 0; i < set.steps.size(); ++i) {
    const long long step = set.steps[i];
    const bool last = i + 1 == set.steps.size();
    if (step % stride != 0 && !last) continue;
    for (const char* split : {"train", "val"}) {
      const Batch& batch = std::string(split) == "train" ? ctx.train_batch : ctx.val_batch;
      ActivationRecord rec;
      rec.position = cfg.analysis.id_position;
      ctx.model.forward_loss(set.values[i], batch, &rec);
      for (std::size_t l = 0; l < rec.layers.size(); ++l) {
        w.field(step);
        w.field(rec.layers[l]);
        w.field(std::string(split));
        w.field(std::string(id_method_name(method)));
        w.field(static_cast<long long>(cfg.analysis.id_k));
        try {
          const PointCloud cloud =
              make_cloud(std::move(rec.values[l]), static_cast<std::size_t>(batch.n),
                         static_cast<std::size_t>(rec.dims[l]));
          const IDEstimate est =
              estimate_id(cloud, method, cfg.analysis.id_k, cfg.analysis.id_discard);
          w.field(est.defined ? format_double(est.value) : std::string());
          w.field(static_cast<long long>(est.n_used));
        } catch (const RuntimeFault&) {
          w.field(std::string());  // degenerate cloud (constant activations)
          w.field(0LL);
        }
        w.end_row();
      }
    }
  }
}

PowerLawFit analyze_fit_t4(const std::string& runs_parent_dir) {
  std::vector<std::pair<double, double>> points;
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(runs_parent_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "config.json") &&
        fs::exists(entry.path() / "metrics.csv"))
      subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) {
    const ExperimentPaths dir{sub.string()};
    const RunConfig cfg = load_config(dir.config_json());
    const RunContext ctx(cfg);
    const TrainTrace trace = load_trace(dir);
    if (trace.rows.empty()) continue;
    const PhaseMarks marks = detect_phases(trace, thresholds_for(ctx));
    if (marks.t4 && *marks.t4 > 0) points.push_back({cfg.task.r, static_cast<double>(*marks.t4)});
  }
  if (points.size() < 3)
    throw RuntimeFault("fit-t4: need at least 3 finished runs with a t4 mark under " +
                       runs_parent_dir);
  const PowerLawFit fit = fit_power_law(points);

  json j;
  j["a"] = fit.a;
  j["gamma"] = fit.gamma;
  j["b"] = fit.b;
  j["residual_rms"] = fit.residual_rms;
  j["gamma_identifiable"] = fit.gamma_identifiable;
  j["points"] = json::array();
  for (auto [r, t4] : fit.points) j["points"].push_back({{"r", r}, {"t4", t4}});
  std::ofstream out((fs::path(runs_parent_dir) / "powerlaw.json").string());
  out << j.dump(2) << "\n";
  return fit;
}

FigureKind figure_from_name(const std::string& s) {
  if (s == "learning-curve") return FigureKind::learning_curve;
  if (s == "heatmap") return FigureKind::heatmap;
  if (s == "slice") return FigureKind::slice;
  if (s == "condition") return FigureKind::condition;
  if (s == "pca") return FigureKind::pca;
  throw ConfigError("unknown figure kind: " + s);
}

std::vector<std::string> cmd_plot(const ExperimentPaths& dir, FigureKind kind) {
  fs::create_directories(dir.plots_dir());
  std::vector<std::string> written;
  auto out_path = [&](const std::string& name) {
    return (fs::path(dir.plots_dir()) / name).string();
  };

  switch (kind) {
    case FigureKind::learning_curve: {
      if (!fs::exists(dir.metrics_csv()))
        throw RuntimeFault("plot: missing " + dir.metrics_csv());
      const TrainTrace trace = load_trace(dir);
      svg::LinePlot plot;
      plot.title = "learning curves";
      plot.xlabel = "step";
      plot.ylabel = "loss";
      plot.ylabel_right = "accuracy";
      svg::Series tl{"train loss"}, vl{"val loss"}, ta{"train acc"}, va{"val acc"};
      vl.dashed = true;
      va.dashed = true;
      ta.axis = va.axis = 1;
      ta.color = "#d62728";
      va.color = "#d62728";
      tl.color = "#1f77b4";
      vl.color = "#1f77b4";
      for (const auto& r : trace.rows) {
        tl.x.push_back(static_cast<double>(r.step));
        tl.y.push_back(r.train_loss);
        vl.x.push_back(static_cast<double>(r.step));
        vl.y.push_back(r.val_loss);
        ta.x.push_back(static_cast<double>(r.step));
        ta.y.push_back(r.train_acc);
        va.x.push_back(static_cast<double>(r.step));
        va.y.push_back(r.val_acc);
      }
      plot.series = {tl, vl, ta, va};
      if (fs::exists(dir.config_json())) {
        const RunConfig cfg = load_config(dir.config_json());
        const RunContext ctx(cfg);
        const PhaseMarks marks = detect_phases(trace, thresholds_for(ctx));
        if (marks.t2) plot.vmarkers.push_back({static_cast<double>(*marks.t2), "t2"});
        if (marks.t4) plot.vmarkers.push_back({static_cast<double>(*marks.t4), "t4"});
      }
      const std::string p = out_path("learning_curve.svg");
      plot.write(p);
      written.push_back(p);
      break;
    }
    case FigureKind::heatmap: {
      if (!fs::exists(dir.sweep_csv())) throw RuntimeFault("plot: missing " + dir.sweep_csv());
      const CsvTable t = read_csv(dir.sweep_csv());
      const int c_lr = t.col("lr"), c_wd = t.col("weight_decay");
      const int c_acc = t.col("final_val_acc"), c_act = t.col("activity");
      std::vector<double> lrs, wds;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double lr = t.num(i, c_lr), wd = t.num(i, c_wd);
        if (std::find(lrs.begin(), lrs.end(), lr) == lrs.end()) lrs.push_back(lr);
        if (std::find(wds.begin(), wds.end(), wd) == wds.end()) wds.push_back(wd);
      }
      std::sort(lrs.begin(), lrs.end());
      std::sort(wds.begin(), wds.end());
      for (const auto& [col, name, title] :
           {std::tuple{c_acc, "heatmap_val_acc.svg", "final validation accuracy"},
            std::tuple{c_act, "heatmap_activity.svg", "early-window activity"}}) {
        svg::Heatmap hm;
        hm.title = title;
        hm.xlabel = "weight decay";
        hm.ylabel = "learning rate";
        hm.rows = static_cast<int>(lrs.size());
        hm.cols = static_cast<int>(wds.size());
        hm.values.assign(static_cast<std::size_t>(hm.rows * hm.cols),
                         std::numeric_limits<double>::quiet_NaN());
        for (double wd : wds) hm.xticks.push_back(format_double(wd));
        for (double lr : lrs) hm.yticks.push_back(format_double(lr));
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          const auto ri = std::find(lrs.begin(), lrs.end(), t.num(i, c_lr)) - lrs.begin();
          const auto ci = std::find(wds.begin(), wds.end(), t.num(i, c_wd)) - wds.begin();
          hm.values[static_cast<std::size_t>(ri) * wds.size() + static_cast<std::size_t>(ci)] =
              t.num(i, col);
        }
        const std::string p = out_path(name);
        hm.write(p);
        written.push_back(p);
      }
      break;
    }
    case FigureKind::slice: {
      if (!fs::exists(dir.slices_dir()))
        throw RuntimeFault("plot: missing " + dir.slices_dir());
      for (const auto& entry : fs::directory_iterator(dir.slices_dir())) {
        if (entry.path().extension() != ".csv") continue;
        const CsvTable t = read_csv(entry.path().string());
        if (t.col("beta") >= 0) continue;  // 2D grids are dumped, not panel-plotted
        svg::LinePlot plot;
        plot.title = entry.path().stem().string();
        plot.xlabel = "alpha";
        plot.ylabel = "loss";
        plot.ylabel_right = "accuracy";
        svg::Series tl{"train loss"}, vl{"val loss"}, ta{"train acc"}, va{"val acc"};
        vl.dashed = true;
        va.dashed = true;
        ta.axis = va.axis = 1;
        tl.color = vl.color = "#1f77b4";
        ta.color = va.color = "#d62728";
        const int c_a = t.col("alpha");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          const double a = t.num(i, c_a);
          tl.x.push_back(a);
          tl.y.push_back(t.num(i, t.col("train_loss")));
          vl.x.push_back(a);
          vl.y.push_back(t.num(i, t.col("val_loss")));
          ta.x.push_back(a);
          ta.y.push_back(t.num(i, t.col("train_acc")));
          va.x.push_back(a);
          va.y.push_back(t.num(i, t.col("val_acc")));
        }
        plot.series = {tl, vl, ta, va};
        const std::string p = out_path(entry.path().stem().string() + ".svg");
        plot.write(p);
        written.push_back(p);
      }
      if (written.empty()) throw RuntimeFault("plot: no 1D slice CSVs under " + dir.slices_dir());
      break;
    }
    case FigureKind::condition: {
      if (!fs::exists(dir.curvature_csv()))
        throw RuntimeFault("plot: missing " + dir.curvature_csv());
      const CsvTable t = read_csv(dir.curvature_csv());
      svg::LinePlot plot;
      plot.title = "hessian extremal eigenvalues";
      plot.xlabel = "step";
      plot.ylabel = "lambda";
      plot.ylabel_right = "lambda_min / lambda_max";
      svg::Series lmax{"lambda_max"}, lmin{"lambda_min"}, cond{"condition"};
      cond.axis = 1;
      cond.dashed = true;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double step = t.num(i, t.col("step"));
        lmax.x.push_back(step);
        lmax.y.push_back(t.num(i, t.col("lambda_max")));
        lmin.x.push_back(step);
        lmin.y.push_back(t.num(i, t.col("lambda_min")));
        if (!t.rows[i][static_cast<std::size_t>(t.col("paper_condition"))].empty()) {
          cond.x.push_back(step);
          cond.y.push_back(t.num(i, t.col("paper_condition")));
        }
      }
      plot.series = {lmax, lmin, cond};
      const std::string p = out_path("condition.svg");
      plot.write(p);
      written.push_back(p);
      break;
    }
    case FigureKind::pca: {
      if (!fs::exists(dir.pca_csv())) throw RuntimeFault("plot: missing " + dir.pca_csv());
      const CsvTable t = read_csv(dir.pca_csv());
      svg::LinePlot plot;
      plot.title = "trajectory in the top-2 principal directions";
      plot.xlabel = "alpha";
      plot.ylabel = "beta";
      svg::Series path{"trajectory"}, pts{""};
      pts.points_only = true;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        path.x.push_back(t.num(i, t.col("alpha")));
        path.y.push_back(t.num(i, t.col("beta")));
        pts.x = path.x;
        pts.y = path.y;
      }
      plot.series = {path, pts};
      const std::string p = out_path("pca.svg");
      plot.write(p);
      written.push_back(p);
      break;
    }
  }
  return written;
}

}  // namespace groklab
