#include "groklab/testfn.hpp"

#include <cmath>

namespace groklab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double raw_eval_grad(const TestFnSpec& spec, ConstSpan x, Span grad) {
  const int n = spec.n;
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  double g = 0.0;
  switch (spec.kind) {
    case TestFnKind::rosenbrock_pairwise:
      for (int i = 0; i + 1 < n; i += 2) {
        const double xo = x[static_cast<std::size_t>(i)];      // odd coordinate (1-based)
        const double xe = x[static_cast<std::size_t>(i + 1)];  // its even partner
        const double t = xe - xo * xo;
        g += 100.0 * t * t + (xo - 1.0) * (xo - 1.0);
        if (want_grad) {
          grad[static_cast<std::size_t>(i)] = -400.0 * xo * t + 2.0 * (xo - 1.0);
          grad[static_cast<std::size_t>(i + 1)] = 200.0 * t;
        }
      }
      break;
    case TestFnKind::rosenbrock_chained:
      for (int i = 0; i + 1 < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double xn = x[static_cast<std::size_t>(i + 1)];
        const double t = xn - xi * xi;
        g += 100.0 * t * t + (xi - 1.0) * (xi - 1.0);
        if (want_grad) {
          grad[static_cast<std::size_t>(i)] += -400.0 * xi * t + 2.0 * (xi - 1.0);
          grad[static_cast<std::size_t>(i + 1)] += 200.0 * t;
        }
      }
      break;
    case TestFnKind::rastrigin:
      g = spec.a * n;
      for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        g += xi * xi - spec.a * std::cos(kTwoPi * xi);
        if (want_grad)
          grad[static_cast<std::size_t>(i)] = 2.0 * xi + kTwoPi * spec.a * std::sin(kTwoPi * xi);
      }
      break;
  }
  return g;
}

}  // namespace

const char* testfn_name(TestFnKind k) {
  switch (k) {
    case TestFnKind::rosenbrock_pairwise: return "rosenbrock_pairwise";
    case TestFnKind::rosenbrock_chained: return "rosenbrock_chained";
    case TestFnKind::rastrigin: return "rastrigin";
  }
  return "?";
}

TestFnKind testfn_from_name(const std::string& s) {
  if (s == "rosenbrock_pairwise") return TestFnKind::rosenbrock_pairwise;
  if (s == "rosenbrock_chained") return TestFnKind::rosenbrock_chained;
  if (s == "rastrigin") return TestFnKind::rastrigin;
  throw ConfigError("unknown test function: " + s);
}

double eval_grad(const TestFnSpec& spec, ConstSpan x, Span grad) {
  const int min_dim = spec.kind == TestFnKind::rastrigin ? 1 : 2;
  if (spec.n < min_dim) throw RuntimeFault("testfn: dimension too small");
  if (spec.kind == TestFnKind::rosenbrock_pairwise && spec.n % 2 != 0)
    throw RuntimeFault("testfn: pairwise rosenbrock needs an even dimension");
  if (static_cast<int>(x.size()) != spec.n)
    throw RuntimeFault("testfn: point dimension mismatch");
  if (!grad.empty() && grad.size() != x.size())
    throw RuntimeFault("testfn: gradient dimension mismatch");

  if (!spec.log_scale) return raw_eval_grad(spec, x, grad);
  const double g = raw_eval_grad(spec, x, grad);
  if (!grad.empty()) {
    const double s = 1.0 / (1.0 + g);
    for (double& c : grad) c *= s;
  }
  return std::log1p(g);
}

std::vector<double> testfn_minimum(const TestFnSpec& spec) {
  const double v = spec.kind == TestFnKind::rastrigin ? 0.0 : 1.0;
  return std::vector<double>(static_cast<std::size_t>(spec.n), v);
}

std::vector<RaceEntry> default_racers() {
  std::vector<RaceEntry> out;
  auto add = [&](const std::string& name, Algo algo, double lr) {
    RaceEntry e;
    e.name = name;
    e.config.algo = algo;
    e.config.lr = lr;
    e.config.weight_decay = 0.0;
    e.config.beta1 = 0.9;
    e.config.beta2 = 0.999;
    out.push_back(e);
  };
  add("sgd", Algo::sgd, 1e-3);
  add("momentum", Algo::momentum, 1e-3);
  add("rmsprop", Algo::rmsprop, 1e-3);
  add("rprop", Algo::rprop, 1e-2);
  add("adam", Algo::adam, 1e-2);
  add("adamax", Algo::adamax, 1e-2);
  return out;
}

RaceResult race(const TestFnSpec& spec, const std::vector<RaceEntry>& entries, ConstSpan x0,
                long long steps, double reach_threshold) {
  if (static_cast<int>(x0.size()) != spec.n) throw RuntimeFault("race: start dimension mismatch");
  RaceResult res;
  res.x_star = testfn_minimum(spec);

  for (const auto& entry : entries) {
    OptimizerRun run;
    run.name = entry.name;
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> grad(x.size());
    Optimizer opt(entry.config, x.size());

    auto record = [&]() {
      run.trajectory.push_back(x);
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - res.x_star[i];
        err += d * d;
      }
      run.error.push_back(std::sqrt(err));
      run.value.push_back(eval_grad(spec, x, {}));
    };
    record();

    for (long long t = 0; t < steps; ++t) {
      if (run.diverged) {
        run.trajectory.push_back(x);
        run.error.push_back(run.error.back());
        run.value.push_back(run.value.back());
        continue;
      }
      eval_grad(spec, x, grad);
      try {
        opt.step(x, grad, entry.config.lr);
      } catch (const RuntimeFault&) {
        run.diverged = true;
      }
      bool finite = true;
      for (double c : x) finite = finite && std::isfinite(c);
      if (!finite) {
        run.diverged = true;
        x = run.trajectory.back();  // freeze at the last finite iterate
      }
      record();
    }
    run.final_error = run.error.back();
    run.reached = !run.diverged && run.final_error <= reach_threshold;
    res.runs.push_back(std::move(run));
  }
  return res;
}

}  // namespace groklab
