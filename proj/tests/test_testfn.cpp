#include <doctest.h>

#include <cmath>

#include "groklab/rng.hpp"
#include "groklab/testfn.hpp"

using namespace groklab;

namespace {

double fd_gradient_error(const TestFnSpec& spec, ConstSpan x) {
  std::vector<double> grad(x.size());
  eval_grad(spec, x, grad);
  std::vector<double> probe(x.begin(), x.end());
  double gmax = 1.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = eval_grad(spec, probe, {});
    probe[i] = x[i] - h;
    const double dn = eval_grad(spec, probe, {});
    probe[i] = x[i];
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / gmax);
  }
  return worst;
}

}  // namespace

TEST_CASE("rosenbrock minima") {
  for (TestFnKind kind : {TestFnKind::rosenbrock_pairwise, TestFnKind::rosenbrock_chained}) {
    for (int n : {2, 4, 6}) {
      TestFnSpec spec;
      spec.kind = kind;
      spec.n = n;
      const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
      std::vector<double> grad(static_cast<std::size_t>(n));
      CHECK(eval_grad(spec, ones, grad) == 0.0);
      for (double g : grad) CHECK(g == 0.0);
    }
  }
}

TEST_CASE("chained rosenbrock hand values at the origin") {
  TestFnSpec spec;
  spec.kind = TestFnKind::rosenbrock_chained;
  spec.n = 2;
  std::vector<double> grad(2);
  CHECK(eval_grad(spec, std::vector<double>{0.0, 0.0}, grad) == 1.0);
  CHECK(grad[0] == -2.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("rastrigin hand values") {
  TestFnSpec spec;
  spec.kind = TestFnKind::rastrigin;
  spec.n = 1;
  spec.a = 10.0;
  std::vector<double> grad(1);
  const double v = eval_grad(spec, std::vector<double>{0.5}, grad);
  CHECK(v == doctest::Approx(20.25).epsilon(1e-12));
  CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rastrigin equals the squared norm on integer points") {
  TestFnSpec spec;
  spec.kind = TestFnKind::rastrigin;
  spec.n = 3;
  for (const auto& x : {std::vector<double>{0, 0, 0}, std::vector<double>{1, -2, 3},
                        std::vector<double>{4, 0, -1}}) {
    double norm_sq = 0.0;
    for (double c : x) norm_sq += c * c;
    CHECK(eval_grad(spec, x, {}) == doctest::Approx(norm_sq).epsilon(1e-9));
  }
}

TEST_CASE("both rosenbrock variants coincide for n=2") {
  TestFnSpec a, b;
  a.kind = TestFnKind::rosenbrock_pairwise;
  b.kind = TestFnKind::rosenbrock_chained;
  a.n = b.n = 2;
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::vector<double> ga(2), gb(2);
    CHECK(eval_grad(a, x, ga) == eval_grad(b, x, gb));
    CHECK(ga == gb);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(11);
  for (TestFnKind kind : {TestFnKind::rosenbrock_pairwise, TestFnKind::rosenbrock_chained,
                          TestFnKind::rastrigin}) {
    TestFnSpec spec;
    spec.kind = kind;
    spec.n = 4;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(4);
      for (double& c : x) c = rng.uniform(-2.0, 2.0);
      CHECK(fd_gradient_error(spec, x) <= 1e-7);
    }
    spec.log_scale = true;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(4);
      for (double& c : x) c = rng.uniform(-2.0, 2.0);
      CHECK(fd_gradient_error(spec, x) <= 1e-7);
    }
  }
}

TEST_CASE("log scale keeps the minimum in place") {
  TestFnSpec spec;
  spec.kind = TestFnKind::rosenbrock_chained;
  spec.n = 4;
  spec.log_scale = true;
  const std::vector<double> xstar = testfn_minimum(spec);
  std::vector<double> grad(4);
  CHECK(eval_grad(spec, xstar, grad) == 0.0);  // log1p keeps the optimum at 0
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("dimension validation") {
  TestFnSpec spec;
  spec.kind = TestFnKind::rosenbrock_pairwise;
  spec.n = 3;
  CHECK_THROWS_AS(eval_grad(spec, std::vector<double>{1, 2, 3}, {}), RuntimeFault);
  spec.kind = TestFnKind::rosenbrock_chained;
  CHECK_THROWS_AS(eval_grad(spec, std::vector<double>{1.0, 2.0}, {}), RuntimeFault);
}

TEST_CASE("race records trajectories and survives divergence") {
  // raw objective: the log transform bounds the gradient too well to overflow
  TestFnSpec spec;
  spec.kind = TestFnKind::rosenbrock_chained;
  spec.n = 2;

  std::vector<RaceEntry> entries = default_racers();
  RaceEntry wild;
  wild.name = "sgd_wild";
  wild.config.algo = Algo::sgd;
  wild.config.lr = 1e9;
  wild.config.weight_decay = 0.0;
  entries.push_back(wild);

  const std::vector<double> x0{-2.0, 2.0};
  const RaceResult res = race(spec, entries, x0, 500, 1e-2);
  REQUIRE(res.runs.size() == entries.size());
  for (const auto& run : res.runs) {
    CHECK(run.trajectory.size() == 501);
    CHECK(run.error.size() == 501);
    for (double e : run.error) CHECK(e >= 0.0);
  }
  CHECK(res.runs.back().diverged);
  // adaptive steppers make visible progress even in a short race
  for (const auto& run : res.runs)
    if (run.name == "rprop") CHECK(run.final_error < run.error.front());
}
