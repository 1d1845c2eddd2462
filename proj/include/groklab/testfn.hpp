#pragma once

#include <string>
#include <vector>

#include "groklab/common.hpp"
#include "groklab/optim.hpp"

namespace groklab {

enum class TestFnKind { rosenbrock_pairwise, rosenbrock_chained, rastrigin };

const char* testfn_name(TestFnKind k);
TestFnKind testfn_from_name(const std::string& s);

struct TestFnSpec {
  TestFnKind kind = TestFnKind::rosenbrock_chained;
  int n = 2;
  double a = 10.0;        // rastrigin constant
  bool log_scale = false; // optimize log(1+g); keeps the ravine, leaves the minimum at 0
};

// Analytic value and gradient; grad may be empty to skip it.
double eval_grad(const TestFnSpec& spec, ConstSpan x, Span grad);

std::vector<double> testfn_minimum(const TestFnSpec& spec);

struct RaceEntry {
  std::string name;
  OptimizerConfig config;
};

// Per-optimizer learning rates for the benchmark races; the adaptive methods
// take a larger step since they self-scale.
std::vector<RaceEntry> default_racers();

struct OptimizerRun {
  std::string name;
  std::vector<std::vector<double>> trajectory;  // budget + 1 iterates
  std::vector<double> error;                    // ||x_t - x*|| per iterate
  std::vector<double> value;                    // objective per iterate
  double final_error = 0;
  bool reached = false;
  bool diverged = false;
};

struct RaceResult {
  std::vector<OptimizerRun> runs;
  std::vector<double> x_star;
};

// Runs each optimizer independently from the shared start. Divergence is
// recorded (iterate frozen at the last finite point) and the race continues.
RaceResult race(const TestFnSpec& spec, const std::vector<RaceEntry>& entries, ConstSpan x0,
                long long steps, double reach_threshold);

}  // namespace groklab
