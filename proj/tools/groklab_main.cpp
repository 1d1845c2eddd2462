// groklab: train small models on modular arithmetic until they grok, predict
// the grok from the early loss spectrum, and map the loss landscape along the
// trajectory. Exit codes: 0 ok, 2 config error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "groklab/csv.hpp"
#include "groklab/experiment.hpp"
#include "groklab/intrinsic_dim.hpp"
#include "groklab/linalg.hpp"
#include "groklab/rng.hpp"
#include "groklab/testfn.hpp"

namespace {

using namespace groklab;

std::string phase_str(const std::optional<long long>& t) {
  return t ? std::to_string(*t) : std::string("-");
}

void print_phases(const PhaseMarks& m) {
  std::printf("phases: t1=%s t2=%s t3=%s t4=%s\n", phase_str(m.t1).c_str(),
              phase_str(m.t2).c_str(), phase_str(m.t3).c_str(), phase_str(m.t4).c_str());
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty list: " + s);
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  if (out.empty()) throw ConfigError("empty list: " + s);
  return out;
}

// "lo:hi:n"
void parse_alphas(const std::string& s, AnalyzeOverrides& ov) {
  double lo, hi;
  int n;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3)
    throw ConfigError("--alphas expects lo:hi:n, got " + s);
  ov.alpha_min = lo;
  ov.alpha_max = hi;
  ov.alpha_points = n;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"grokking laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, which, figure, runs_dir;
  bool force = false;
  int workers = 1;
  std::uint64_t seed_override = 0;
  bool have_seed = false;
  std::string window_arg, cutoff_arg, alphas_arg, kind_arg = "to_optimum";
  int blas_threads = 1;

  app.add_option("--blas-threads", blas_threads, "BLAS thread count");

  auto* t = app.add_subcommand("train", "train one run into --out");
  t->add_option("--config", config_path, "run config JSON")->required();
  t->add_option("--out", out_dir, "output directory")->required();
  t->add_flag("--force", force, "overwrite an existing run");
  t->add_option("--seed", seed_override, "override task.seed")->each([&](const std::string&) {
    have_seed = true;
  });

  auto* sw = app.add_subcommand("sweep", "grid of runs; writes sweep.csv into --out");
  std::string lrs_arg, wds_arg, rs_arg = "0.5", seeds_arg = "0";
  sw->add_option("--config", config_path, "base config JSON")->required();
  sw->add_option("--out", out_dir, "output directory")->required();
  sw->add_option("--lrs", lrs_arg, "comma list of learning rates")->required();
  sw->add_option("--wds", wds_arg, "comma list of weight decays")->required();
  sw->add_option("--rs", rs_arg, "comma list of training fractions");
  sw->add_option("--seeds", seeds_arg, "comma list of seeds");
  sw->add_option("--workers", workers, "parallel runs");

  auto* an = app.add_subcommand("analyze", "post-hoc analysis of a finished run");
  an->add_option("--dir", out_dir, "run directory")->required();
  an->add_option("--which", which, "spectral|landscape|curvature|pca|id|phases|fit-t4")
      ->required();
  an->add_option("--window", window_arg, "spectral window start:end");
  an->add_option("--cutoff", cutoff_arg, "detrend cutoff fraction");
  an->add_option("--alphas", alphas_arg, "slice grid lo:hi:n");
  an->add_option("--kind", kind_arg, "slice direction: to_optimum|to_init|next_step|random");

  auto* pl = app.add_subcommand("plot", "render SVG figures from a run's CSVs");
  pl->add_option("--dir", out_dir, "run directory")->required();
  pl->add_option("--figure", figure, "learning-curve|heatmap|slice|condition|pca")->required();

  auto* tf = app.add_subcommand("testfn", "optimizer race on an analytic objective");
  std::string fn_name = "rosenbrock_chained";
  bool log_scale = true;
  long long budget = 10000;
  double reach = 1e-2;
  std::string x0_arg = "-2,2";
  tf->add_option("--fn", fn_name, "rosenbrock_pairwise|rosenbrock_chained|rastrigin");
  tf->add_flag("--log-scale,!--no-log-scale", log_scale, "optimize log(1+g)");
  tf->add_option("--x0", x0_arg, "start point, comma list");
  tf->add_option("--budget", budget, "steps per optimizer");
  tf->add_option("--reach", reach, "euclidean error counted as reaching the minimum");
  tf->add_option("--out", out_dir, "output directory")->required();

  auto* ids = app.add_subcommand("id-synthetic", "intrinsic-dimension battery on synthetic manifolds");
  ids->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  la::set_blas_threads(blas_threads);

  if (t->parsed()) {
    RunConfig cfg = load_config(config_path);
    if (have_seed) cfg.task.seed = seed_override;
    const TrainResult res = cmd_train(cfg, out_dir, force);
    print_phases(res.phases);
    std::printf("metrics: %s\n", ExperimentPaths{out_dir}.metrics_csv().c_str());
    return 0;
  }

  if (sw->parsed()) {
    RunConfig cfg = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    const ExperimentPaths dir{out_dir};
    const auto cells = sweep(cfg, parse_list(lrs_arg), parse_list(wds_arg), parse_list(rs_arg),
                             parse_seed_list(seeds_arg), workers, dir.sweep_csv());
    int ok = 0, grokked = 0;
    for (const auto& c : cells) {
      ok += c.failed ? 0 : 1;
      grokked += c.grokked ? 1 : 0;
    }
    std::printf("sweep: %d/%zu cells finished, %d grokked -> %s\n", ok, cells.size(), grokked,
                dir.sweep_csv().c_str());
    return 0;
  }

  if (an->parsed()) {
    const ExperimentPaths dir{out_dir};
    AnalyzeOverrides ov;
    if (!window_arg.empty()) {
      long long a = 0, b = 0;
      if (std::sscanf(window_arg.c_str(), "%lld:%lld", &a, &b) != 2)
        throw ConfigError("--window expects start:end");
      ov.window_start = a;
      ov.window_end = b;
    }
    if (!cutoff_arg.empty()) ov.cutoff = std::stod(cutoff_arg);
    if (!alphas_arg.empty()) parse_alphas(alphas_arg, ov);
    if (kind_arg == "to_optimum") ov.slice_kind = DirectionKind::to_optimum;
    else if (kind_arg == "to_init") ov.slice_kind = DirectionKind::to_init;
    else if (kind_arg == "next_step") ov.slice_kind = DirectionKind::next_step;
    else if (kind_arg == "random") ov.slice_kind = DirectionKind::random;
    else throw ConfigError("unknown slice kind: " + kind_arg);

    if (which == "spectral") analyze_spectral(dir, ov);
    else if (which == "landscape") analyze_landscape(dir, ov);
    else if (which == "curvature") analyze_curvature(dir);
    else if (which == "pca") analyze_pca(dir);
    else if (which == "id") analyze_id(dir);
    else if (which == "phases") analyze_phases(dir);
    else if (which == "fit-t4") {
      const PowerLawFit fit = analyze_fit_t4(out_dir);
      std::printf("t4(r) = %.6g * r^-%.6g + %.6g (rms %.4g)\n", fit.a, fit.gamma, fit.b,
                  fit.residual_rms);
    } else {
      throw ConfigError("unknown analysis: " + which);
    }
    return 0;
  }

  if (pl->parsed()) {
    const auto files = cmd_plot(ExperimentPaths{out_dir}, figure_from_name(figure));
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    return 0;
  }

  if (tf->parsed()) {
    TestFnSpec spec;
    spec.kind = testfn_from_name(fn_name);
    spec.log_scale = log_scale;
    const auto x0 = parse_list(x0_arg);
    spec.n = static_cast<int>(x0.size());
    std::filesystem::create_directories(out_dir);
    const RaceResult res = race(spec, default_racers(), x0, budget, reach);

    CsvWriter w((std::filesystem::path(out_dir) / "race.csv").string());
    std::vector<std::string> cols{"optimizer", "step"};
    for (int i = 0; i < spec.n; ++i) cols.push_back("x" + std::to_string(i));
    cols.push_back("value");
    cols.push_back("error");
    w.header(cols);
    for (const auto& run : res.runs)
      for (std::size_t s = 0; s < run.trajectory.size(); ++s) {
        w.field(run.name);
        w.field(static_cast<long long>(s));
        for (double c : run.trajectory[s]) w.field(c);
        w.field(run.value[s]);
        w.field(run.error[s]);
        w.end_row();
      }
    // contour grid for 2-D plotting
    if (spec.n == 2) {
      CsvWriter g((std::filesystem::path(out_dir) / "contour.csv").string());
      g.header({"x", "y", "value"});
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
          const double x = -3.0 + 6.0 * i / 100.0;
          const double y = -3.0 + 6.0 * j / 100.0;
          g.field(x);
          g.field(y);
          g.field(eval_grad(spec, std::vector<double>{x, y}, {}));
          g.end_row();
        }
    }
    for (const auto& run : res.runs)
      std::printf("%-10s final error %.4g%s%s\n", run.name.c_str(), run.final_error,
                  run.reached ? "  [reached]" : "", run.diverged ? "  [diverged]" : "");
    return 0;
  }

  if (ids->parsed()) {
    std::filesystem::create_directories(out_dir);
    CsvWriter w((std::filesystem::path(out_dir) / "id_battery.csv").string());
    w.header({"true_dim", "n", "ambient", "mle_inverse", "twonn"});
    std::vector<double> mle_vals, twonn_vals;
    Rng rng(7);
    const int ambient = 128;
    for (int d : {1, 2, 3, 4, 5, 6, 7, 8})
      for (std::size_t n : {1200u, 2000u}) {
        std::vector<double> pts(n * ambient, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (int c = 0; c < d; ++c) pts[i * ambient + static_cast<std::size_t>(c)] = rng.uniform();
        const PointCloud cloud = make_cloud(std::move(pts), n, ambient);
        const IDEstimate mle = mle_id(cloud, 2, true);
        const IDEstimate two = twonn_id(cloud, 0.1);
        mle_vals.push_back(mle.value);
        twonn_vals.push_back(two.value);
        w.field(static_cast<long long>(d));
        w.field(static_cast<long long>(n));
        w.field(static_cast<long long>(ambient));
        w.field(mle.value);
        w.field(two.value);
        w.end_row();
      }
    double mm = 0, mt = 0;
    for (std::size_t i = 0; i < mle_vals.size(); ++i) {
      mm += mle_vals[i];
      mt += twonn_vals[i];
    }
    mm /= static_cast<double>(mle_vals.size());
    mt /= static_cast<double>(twonn_vals.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < mle_vals.size(); ++i) {
      sxy += (mle_vals[i] - mm) * (twonn_vals[i] - mt);
      sxx += (mle_vals[i] - mm) * (mle_vals[i] - mm);
      syy += (twonn_vals[i] - mt) * (twonn_vals[i] - mt);
    }
    std::printf("pearson(mle_inverse, twonn) = %.4f over %zu manifolds\n",
                sxy / std::sqrt(sxx * syy), mle_vals.size());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
