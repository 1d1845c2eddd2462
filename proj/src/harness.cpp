#include "groklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "groklab/csv.hpp"
#include "groklab/spectral.hpp"

namespace groklab {

namespace fs = std::filesystem;

std::vector<double> TrainTrace::train_loss_series() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.train_loss);
  return v;
}

double chance_level(int q, long long n_samples) {
  if (q <= 0 || n_samples <= 0) throw RuntimeFault("chance_level: bad arguments");
  const double p = 1.0 / static_cast<double>(q);
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  return p + 2.0 * sigma;
}

PhaseMarks detect_phases(const TrainTrace& trace, const PhaseThresholds& th) {
  if (trace.rows.empty()) throw RuntimeFault("detect_phases: empty trace");
  PhaseMarks m;
  for (const auto& row : trace.rows) {
    if (!m.t1 && row.train_acc > th.train_chance) m.t1 = row.step;
    if (!m.t2 && row.train_acc >= th.train_threshold) m.t2 = row.step;
    if (!m.t3 && row.val_acc > th.val_chance) m.t3 = row.step;
    if (!m.t4 && row.val_acc >= th.val_threshold) m.t4 = row.step;
  }
  return m;
}

// ---------------------------------------------------------------------------
// power-law fit

double PowerLawFit::eval(double r) const { return a * std::pow(r, -gamma) + b; }

namespace {

double sse_of(const std::vector<std::pair<double, double>>& pts, double a, double g, double b) {
  double s = 0.0;
  for (auto [r, y] : pts) {
    const double e = a * std::pow(r, -g) + b - y;
    s += e * e;
  }
  return s;
}

// least squares for (a, b) at fixed gamma
void linear_ab(const std::vector<std::pair<double, double>>& pts, double g, double* a,
               double* b) {
  double sxx = 0, sx = 0, sxy = 0, sy = 0;
  const double n = static_cast<double>(pts.size());
  for (auto [r, y] : pts) {
    const double x = std::pow(r, -g);
    sxx += x * x;
    sx += x;
    sxy += x * y;
    sy += y;
  }
  const double det = sxx * n - sx * sx;
  if (std::abs(det) < 1e-300) {
    *a = 0.0;
    *b = sy / n;
    return;
  }
  *a = (sxy * n - sx * sy) / det;
  *b = (sxx * sy - sx * sxy) / det;
}

bool solve3(double m[3][3], double rhs[3], double out[3]) {
  int piv[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int best = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[piv[r]][c]) > std::abs(m[piv[best]][c])) best = r;
    std::swap(piv[c], piv[best]);
    const double d = m[piv[c]][c];
    if (std::abs(d) < 1e-300) return false;
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[piv[r]][c] / d;
      for (int k = c; k < 3; ++k) m[piv[r]][k] -= f * m[piv[c]][k];
      rhs[piv[r]] -= f * rhs[piv[c]];
    }
  }
  for (int c = 2; c >= 0; --c) {
    double s = rhs[piv[c]];
    for (int k = c + 1; k < 3; ++k) s -= m[piv[c]][k] * out[k];
    out[c] = s / m[piv[c]][c];
  }
  return true;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw RuntimeFault("fit_power_law: need at least 3 points");
  for (auto [r, y] : points) {
    if (!(r > 0.0 && r < 1.0)) throw RuntimeFault("fit_power_law: r must be in (0,1)");
    if (!(y > 0.0)) throw RuntimeFault("fit_power_law: t4 must be positive");
  }

  PowerLawFit fit;
  fit.points = points;
  fit.r_min = points[0].first;
  fit.r_max = points[0].first;
  double y_scale = 0.0;
  for (auto [r, y] : points) {
    fit.r_min = std::min(fit.r_min, r);
    fit.r_max = std::max(fit.r_max, r);
    y_scale = std::max(y_scale, std::abs(y));
  }

  // stage 1: gamma grid with closed-form (a, b)
  double best_sse = std::numeric_limits<double>::infinity();
  for (double g = 0.5; g <= 16.0; g += 0.5) {
    double a, b;
    linear_ab(points, g, &a, &b);
    const double s = sse_of(points, a, g, b);
    if (s < best_sse) {
      best_sse = s;
      fit.a = a;
      fit.gamma = g;
      fit.b = b;
    }
  }

  // stage 2: Levenberg-Marquardt on (a, gamma, b)
  double a = fit.a, g = fit.gamma, b = fit.b;
  double lambda = 1e-3;
  double sse = best_sse;
  for (int iter = 0; iter < 400; ++iter) {
    double jtj[3][3] = {{0}};
    double jte[3] = {0, 0, 0};
    for (auto [r, y] : points) {
      const double pw = std::pow(r, -g);
      const double e = a * pw + b - y;
      const double jcol[3] = {pw, -a * std::log(r) * pw, 1.0};
      for (int u = 0; u < 3; ++u) {
        jte[u] += jcol[u] * e;
        for (int v = 0; v < 3; ++v) jtj[u][v] += jcol[u] * jcol[v];
      }
    }
    double m[3][3];
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v)
        m[u][v] = jtj[u][v] + (u == v ? lambda * (jtj[u][u] + 1e-300) : 0.0);
    double rhs[3] = {-jte[0], -jte[1], -jte[2]};
    double step[3];
    if (!solve3(m, rhs, step)) {
      lambda *= 10.0;
      continue;
    }
    const double na = a + step[0];
    const double ng = std::max(g + step[1], 1e-9);
    const double nb = b + step[2];
    const double ns = sse_of(points, na, ng, nb);
    if (ns < sse) {
      const double rel = std::abs(sse - ns) / (sse + 1e-300);
      a = na;
      g = ng;
      b = nb;
      sse = ns;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (rel < 1e-15) break;
    } else {
      lambda *= 5.0;
      if (lambda > 1e12) break;
    }
  }
  fit.a = a;
  fit.gamma = g;
  fit.b = b;
  fit.residual_rms = std::sqrt(sse / static_cast<double>(points.size()));
  fit.converged = std::isfinite(sse);
  // the power term must actually move the curve across the fitted domain,
  // otherwise gamma is meaningless (flat data)
  const double swing = std::abs(fit.a) * std::abs(std::pow(fit.r_min, -fit.gamma) -
                                                  std::pow(fit.r_max, -fit.gamma));
  fit.gamma_identifiable = swing > 1e-8 * std::max(1.0, y_scale);
  if (!fit.converged) throw RuntimeFault("fit_power_law: fit did not converge");
  return fit;
}

StopRule stop_rule(const PowerLawFit& fit, double r, long long epsilon) {
  if (!(r > 0.0 && r < 1.0)) throw RuntimeFault("stop_rule: r must be in (0,1)");
  if (epsilon < 0) throw RuntimeFault("stop_rule: epsilon must be >= 0");
  StopRule out;
  out.max_steps = static_cast<long long>(std::ceil(fit.eval(r))) + epsilon;
  out.out_of_fitted_domain = r < fit.r_min;
  return out;
}

// ---------------------------------------------------------------------------
// training loop

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 keeps the per-purpose streams decorrelated
  std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::string& checkpoint_dir,
                  const std::string& metrics_csv) {
  cfg.validate();
  const Dataset ds = build_dataset(cfg.task.op, cfg.task.p, cfg.task.q, cfg.task.symmetric);
  const Split sp = make_split(ds, cfg.task.r, cfg.task.seed);
  const Batch train_batch = batch_encode(sp.train, ds);
  const Batch val_batch = batch_encode(sp.val, ds);

  const Model model(cfg.model_config());
  ParamVector params = model.init_params(derive_seed(cfg.task.seed, 1));
  const std::vector<double> theta0 = params.values;

  Optimizer opt(cfg.optimizer, params.values.size());
  if (!cfg.optimizer.decay_embeddings) {
    std::vector<std::uint8_t> mask(params.values.size(), 1);
    for (const auto& blk : params.layout->blocks)
      if (blk.kind == ParamKind::embedding)
        std::fill(mask.begin() + static_cast<std::ptrdiff_t>(blk.offset),
                  mask.begin() + static_cast<std::ptrdiff_t>(blk.offset + blk.size()), 0);
    opt.set_decay_mask(std::move(mask));
  }

  const bool persist = !checkpoint_dir.empty();
  if (persist) {
    fs::create_directories(checkpoint_dir);
    write_layout_json(*params.layout, (fs::path(checkpoint_dir) / "layout.json").string());
  }
  std::unique_ptr<CsvWriter> csv;
  if (!metrics_csv.empty()) {
    csv = std::make_unique<CsvWriter>(metrics_csv);
    csv->header({"step", "train_loss", "val_loss", "train_acc", "val_acc", "grad_norm", "lr",
                 "cos_prev", "cos_init"});
  }

  TrainResult res;
  auto save = [&](long long step) {
    if (!persist) return;
    save_checkpoint(params.values,
                    (fs::path(checkpoint_dir) / ("step_" + std::to_string(step) + ".bin")).string());
    res.checkpoint_steps.push_back(step);
  };
  save(0);

  PhaseThresholds th;
  th.train_threshold = cfg.analysis.train_threshold;
  th.val_threshold = cfg.analysis.val_threshold;
  th.train_chance = chance_level(cfg.task.q, static_cast<long long>(sp.train.size()));
  th.val_chance = chance_level(cfg.task.q, static_cast<long long>(sp.val.size()));
  PhaseMarks marks;

  std::vector<double> grad(params.values.size(), 0.0);
  std::vector<double> theta_before(params.values.size());

  for (long long t = 0; t < cfg.budget_steps; ++t) {
    const LossReport train_rep = model.backward(params.span(), train_batch, grad);
    const LossReport val_rep = model.forward_loss(params.span(), val_batch);
    if (!std::isfinite(train_rep.loss) || !std::isfinite(val_rep.loss))
      throw RuntimeFault("training diverged: non-finite loss at step " + std::to_string(t));

    TraceRow row;
    row.step = t;
    row.train_loss = train_rep.loss;
    row.val_loss = val_rep.loss;
    row.train_acc = train_rep.accuracy;
    row.val_acc = val_rep.accuracy;
    row.grad_norm = norm2(grad);
    row.cos_init = cosine(params.span(), theta0);

    // phase transitions force a checkpoint at the crossing step
    bool transition = false;
    if (!marks.t1 && row.train_acc > th.train_chance) marks.t1 = t, transition = true;
    if (!marks.t2 && row.train_acc >= th.train_threshold) marks.t2 = t, transition = true;
    if (!marks.t3 && row.val_acc > th.val_chance) marks.t3 = t, transition = true;
    if (!marks.t4 && row.val_acc >= th.val_threshold) marks.t4 = t, transition = true;
    const bool on_stride = cfg.checkpoint_stride > 0 && t % cfg.checkpoint_stride == 0;
    if ((transition || on_stride) && t != 0) save(t);

    if (cfg.clip.enabled) clip_grad_norm(grad, cfg.clip.eta);
    // ramp indexed from 1 so the first update is not a zero-rate no-op
    row.lr = lr_at(cfg.schedule, t + 1);
    theta_before = params.values;
    opt.step(params.span(), grad, row.lr);
    row.cos_prev = cosine(theta_before, params.span());

    if (csv) {
      csv->field(row.step);
      csv->field(row.train_loss);
      csv->field(row.val_loss);
      csv->field(row.train_acc);
      csv->field(row.val_acc);
      csv->field(row.grad_norm);
      csv->field(row.lr);
      csv->field(row.cos_prev);
      csv->field(row.cos_init);
      csv->end_row();
    }
    res.trace.rows.push_back(row);
  }

  if (cfg.budget_steps > 0) save(cfg.budget_steps);
  res.phases = marks;
  res.final_params = std::move(params);
  return res;
}

// ---------------------------------------------------------------------------
// sweeps

std::vector<RunSummary> sweep(const RunConfig& base, const std::vector<double>& lrs,
                              const std::vector<double>& wds, const std::vector<double>& rs,
                              const std::vector<std::uint64_t>& seeds, int workers,
                              const std::string& csv_path) {
  if (lrs.empty() || wds.empty() || rs.empty() || seeds.empty())
    throw RuntimeFault("sweep: empty grid");
  std::vector<SweepCell> cells;
  for (double lr : lrs)
    for (double wd : wds)
      for (double r : rs)
        for (std::uint64_t seed : seeds) cells.push_back({lr, wd, r, seed});

  std::vector<RunSummary> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const SweepCell& cell = cells[i];
      RunSummary& s = out[i];
      s.cell = cell;
      RunConfig cfg = base;
      cfg.optimizer.lr = cell.lr;
      cfg.optimizer.weight_decay = cell.weight_decay;
      cfg.schedule.base_lr = cell.lr;
      cfg.task.r = cell.r;
      cfg.task.seed = cell.seed;
      cfg.checkpoint_stride = 0;  // sweep cells keep nothing on disk
      s.config_hash = config_hash(cfg);
      try {
        TrainResult res = train(cfg);
        s.phases = res.phases;
        s.final_val_acc = res.trace.rows.empty() ? 0.0 : res.trace.rows.back().val_acc;
        const auto loss = res.trace.train_loss_series();
        const long long end = std::min<long long>(cfg.analysis.spectral_window_end,
                                                  static_cast<long long>(loss.size()));
        if (end - cfg.analysis.spectral_window_start >= 8)
          s.activity = grok_score(loss, cfg.analysis.spectral_window_start, end,
                                  cfg.analysis.spectral_cutoff, cfg.analysis.spectral_log_loss);
        s.grokked = s.phases.t4.has_value();
      } catch (const std::exception& e) {
        s.failed = true;
        s.error = e.what();
      }
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (!csv_path.empty()) write_sweep_csv(out, csv_path);
  return out;
}

void write_sweep_csv(const std::vector<RunSummary>& cells, const std::string& path) {
  CsvWriter w(path);
  w.header({"lr", "weight_decay", "r", "seed", "final_val_acc", "t1", "t2", "t3", "t4",
            "activity"});
  for (const auto& s : cells) {
    w.field(s.cell.lr);
    w.field(s.cell.weight_decay);
    w.field(s.cell.r);
    w.field(static_cast<long long>(s.cell.seed));
    w.field(s.final_val_acc);
    w.field(s.phases.t1);
    w.field(s.phases.t2);
    w.field(s.phases.t3);
    w.field(s.phases.t4);
    w.field(s.activity);
    w.end_row();
  }
}

}  // namespace groklab
