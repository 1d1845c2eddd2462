#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "groklab/csv.hpp"
#include "groklab/harness.hpp"
#include "groklab/model.hpp"

using namespace groklab;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.task.op = OpKind::mod_add;
  cfg.task.p = 13;
  cfg.task.q = 13;
  cfg.task.r = 0.5;
  cfg.task.seed = 0;
  cfg.arch = Arch::mlp;
  cfg.width = 16;
  cfg.optimizer.algo = Algo::adamw;
  cfg.optimizer.lr = 3e-3;
  cfg.schedule.base_lr = 3e-3;
  cfg.optimizer.weight_decay = 1.0;
  cfg.budget_steps = 60;
  cfg.checkpoint_stride = 20;
  cfg.analysis.val_threshold = 0.99;
  return cfg;
}

TrainTrace synthetic_trace(const std::vector<double>& train_acc,
                           const std::vector<double>& val_acc) {
  TrainTrace t;
  for (std::size_t i = 0; i < train_acc.size(); ++i) {
    TraceRow r;
    r.step = static_cast<long long>(i);
    r.train_acc = train_acc[i];
    r.val_acc = val_acc[i];
    t.rows.push_back(r);
  }
  return t;
}

std::string temp_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("groklab_harness_" + tag);
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("phase detection first crossings") {
  std::vector<double> ta(8000, 0.0), va(8000, 0.0);
  for (std::size_t i = 150; i < 300; ++i) ta[i] = 0.5;
  for (std::size_t i = 300; i < ta.size(); ++i) ta[i] = 1.0;
  for (std::size_t i = 4000; i < 7000; ++i) va[i] = 0.3;
  for (std::size_t i = 7000; i < va.size(); ++i) va[i] = 1.0;
  PhaseThresholds th;
  th.train_chance = 0.1;
  th.val_chance = 0.1;
  const PhaseMarks m = detect_phases(synthetic_trace(ta, va), th);
  CHECK(m.t1 == 150);
  CHECK(m.t2 == 300);
  CHECK(m.t3 == 4000);
  CHECK(m.t4 == 7000);
}

TEST_CASE("phase detection edge cases") {
  PhaseThresholds th;
  th.train_chance = 0.05;
  th.val_chance = 0.05;

  const PhaseMarks none = detect_phases(
      synthetic_trace(std::vector<double>(100, 0.0), std::vector<double>(100, 0.0)), th);
  CHECK_FALSE(none.t1);
  CHECK_FALSE(none.t2);
  CHECK_FALSE(none.t3);
  CHECK_FALSE(none.t4);

  const PhaseMarks instant = detect_phases(
      synthetic_trace(std::vector<double>(10, 1.0), std::vector<double>(10, 1.0)), th);
  CHECK(instant.t2 == 0);
  CHECK(instant.t4 == 0);

  CHECK_THROWS_AS(detect_phases(TrainTrace{}, th), RuntimeFault);
}

TEST_CASE("chance level sits above 1/q") {
  const double c = chance_level(97, 4704);
  CHECK(c > 1.0 / 97.0);
  CHECK(c < 2.0 / 97.0);
}

TEST_CASE("power law recovers noiseless parameters") {
  std::vector<std::pair<double, double>> pts;
  for (double r = 0.2; r <= 0.901; r += 0.1)
    pts.push_back({r, 2.0 * std::pow(r, -3.0) + 100.0});
  const PowerLawFit fit = fit_power_law(pts);
  CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.gamma == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(fit.b == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(fit.residual_rms <= 1e-6);
  CHECK(fit.gamma_identifiable);
}

TEST_CASE("power law flags flat data") {
  const PowerLawFit fit =
      fit_power_law({{0.2, 500.0}, {0.4, 500.0}, {0.6, 500.0}, {0.8, 500.0}});
  CHECK_FALSE(fit.gamma_identifiable);
  CHECK(fit.eval(0.5) == doctest::Approx(500.0).epsilon(1e-6));
}

TEST_CASE("power law input validation") {
  CHECK_THROWS_AS(fit_power_law({{0.5, 100.0}, {0.6, 90.0}}), RuntimeFault);
  CHECK_THROWS_AS(fit_power_law({{0.5, 100.0}, {1.5, 90.0}, {0.7, 80.0}}), RuntimeFault);
  CHECK_THROWS_AS(fit_power_law({{0.5, 100.0}, {0.6, -9.0}, {0.7, 80.0}}), RuntimeFault);
}

TEST_CASE("stop rule arithmetic") {
  PowerLawFit fit;
  fit.a = 2.0;
  fit.gamma = 3.0;
  fit.b = 100.0;
  fit.r_min = 0.2;
  fit.r_max = 0.9;
  const StopRule sr = stop_rule(fit, 0.5, 1000);
  CHECK(sr.max_steps == 1116);  // 2 * 8 + 100 + 1000
  CHECK_FALSE(sr.out_of_fitted_domain);

  CHECK(stop_rule(fit, 0.5, 0).max_steps == 116);

  const StopRule low = stop_rule(fit, 0.05, 0);
  CHECK(low.out_of_fitted_domain);
  CHECK(low.max_steps >= 16000);
}

TEST_CASE("training is deterministic") {
  const RunConfig cfg = tiny_run_config();
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].train_loss == b.trace.rows[i].train_loss);
    CHECK(a.trace.rows[i].grad_norm == b.trace.rows[i].grad_norm);
  }
  CHECK(a.final_params.values == b.final_params.values);
}

TEST_CASE("budget zero keeps only the initial checkpoint") {
  RunConfig cfg = tiny_run_config();
  cfg.budget_steps = 0;
  const std::string dir = temp_dir("budget0");
  const TrainResult res = train(cfg, dir);
  CHECK(res.trace.rows.empty());
  CHECK(res.checkpoint_steps == std::vector<long long>{0});
  CHECK(fs::exists(fs::path(dir) / "step_0.bin"));
  fs::remove_all(dir);
}

TEST_CASE("checkpoints reproduce recorded metrics") {
  RunConfig cfg = tiny_run_config();
  cfg.budget_steps = 50;
  cfg.checkpoint_stride = 10;
  const std::string dir = temp_dir("ckpt");
  const TrainResult res = train(cfg, dir);

  const Dataset ds = build_dataset(cfg.task.op, cfg.task.p, cfg.task.q, cfg.task.symmetric);
  const Split sp = make_split(ds, cfg.task.r, cfg.task.seed);
  const Batch train_batch = batch_encode(sp.train, ds);
  const Model model(cfg.model_config());

  auto layout = read_layout_json((fs::path(dir) / "layout.json").string());
  CHECK(layout->compatible_with(*model.layout()));
  for (long long step : {10LL, 30LL}) {
    const auto values =
        load_checkpoint((fs::path(dir) / ("step_" + std::to_string(step) + ".bin")).string(),
                        layout->total);
    const double loss = model.forward_loss(values, train_batch).loss;
    CHECK(loss == doctest::Approx(res.trace.rows[static_cast<std::size_t>(step)].train_loss)
                      .epsilon(1e-9));
  }
  fs::remove_all(dir);
}

TEST_CASE("phase ordering holds on a real run") {
  RunConfig cfg = tiny_run_config();
  cfg.budget_steps = 800;
  const TrainResult res = train(cfg);
  REQUIRE(res.phases.t1);
  REQUIRE(res.phases.t2);
  CHECK(*res.phases.t1 <= *res.phases.t2);
  if (res.phases.t3 && res.phases.t4) CHECK(*res.phases.t3 <= *res.phases.t4);
  for (const auto& row : res.trace.rows) {
    CHECK(row.train_acc >= 0.0);
    CHECK(row.train_acc <= 1.0);
    CHECK(row.train_loss >= 0.0);
  }
}

TEST_CASE("sweep runs cells in deterministic order and records failures") {
  RunConfig base = tiny_run_config();
  base.budget_steps = 30;
  // a rate large enough to overflow the forward pass, recorded as a failure
  const auto cells = sweep(base, {1e200, 1e-3}, {0.0, 1.0}, {0.5}, {0}, 1);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].cell.lr == 1e200);
  CHECK(cells[0].cell.weight_decay == 0.0);
  CHECK(cells[1].cell.weight_decay == 1.0);
  CHECK(cells[2].cell.lr == 1e-3);
  // the absurd rate diverges and is recorded, not thrown
  CHECK(cells[0].failed);
  CHECK_FALSE(cells[2].failed);
  CHECK(cells[2].final_val_acc >= 0.0);

  const auto single = sweep(base, {1e-3}, {1.0}, {0.5}, {0}, 1);
  CHECK(single.size() == 1);
  CHECK(single[0].config_hash != 0);
}

TEST_CASE("sweep csv round-trips") {
  RunConfig base = tiny_run_config();
  base.budget_steps = 25;
  const std::string dir = temp_dir("sweepcsv");
  fs::create_directories(dir);
  const std::string csv = dir + "/sweep.csv";
  const auto cells = sweep(base, {1e-3, 3e-3}, {1.0}, {0.5}, {0, 1}, 1, csv);
  const CsvTable t = read_csv(csv);
  CHECK(t.columns == std::vector<std::string>{"lr", "weight_decay", "r", "seed", "final_val_acc",
                                              "t1", "t2", "t3", "t4", "activity"});
  REQUIRE(t.rows.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(t.num(i, 0) == cells[i].cell.lr);
    CHECK(t.num(i, 4) == doctest::Approx(cells[i].final_val_acc));
    CHECK(t.opt_int(i, t.col("t2")) == cells[i].phases.t2);
  }
  fs::remove_all(dir);
}
