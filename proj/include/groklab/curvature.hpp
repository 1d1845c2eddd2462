#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "groklab/common.hpp"

namespace groklab {

using HvpFn = std::function<void(ConstSpan v, Span out)>;
using LossFn = std::function<double(ConstSpan theta)>;
using GradFn = std::function<void(ConstSpan theta, Span grad)>;

struct CurvatureEstimate {
  double lambda_max = 0, lambda_min = 0;
  std::vector<double> v_max, v_min;  // unit eigenvector estimates
  int iterations_max = 0, iterations_min = 0;
  double residual_max = 0, residual_min = 0;  // ||Hv - lambda v|| at exit
  bool converged_max = false, converged_min = false;

  // the ratio lambda_min / lambda_max (reciprocal of the classical condition
  // number; kept in this orientation because the tracked quantity is "how
  // negative does the softest direction get")
  bool condition_defined() const { return lambda_max != 0.0; }
  double paper_condition() const { return lambda_min / lambda_max; }
};

// Extremal eigenvalues by matrix-free power iteration: a positive spectral
// shift makes the dominant eigenvalue of H + cI unique and nonnegative, a
// second pass on lambda_max*I - H recovers the other end. Residuals are
// measured against the unshifted operator.
CurvatureEstimate extremal_eigs(const HvpFn& hvp, std::size_t dim, double tol, int max_iter,
                                std::uint64_t seed = 0);

struct ConditionPoint {
  long long step = 0;
  double lambda_max = 0, lambda_min = 0;
  double condition = 0;
  bool defined = false;
  bool converged = false;
};

std::vector<ConditionPoint> condition_track(
    const std::vector<std::pair<long long, HvpFn>>& checkpoints, std::size_t dim, double tol,
    int max_iter);

struct ExpansionCheck {
  double predicted = 0;  // -eps ||G||^2 + 0.5 eps^2 G^T H G
  double actual = 0;     // L(theta - eps G) - L(theta)
  double gap = 0;
  double grad_norm_sq = 0;
  double ghg = 0;
};

ExpansionCheck sgd_expansion_check(const LossFn& loss, const GradFn& grad, const HvpFn& hvp,
                                   ConstSpan theta, double step_size);

struct TrajectoryPCA {
  std::vector<double> dir1, dir2;  // orthonormal directions in parameter space
  std::vector<long long> steps;
  std::vector<double> alpha, beta;  // projections of theta_t - theta_T
  double explained1 = 0, explained2 = 0;
};

// Top-2 principal directions of the centered trajectory matrix
// [theta_t - theta_T], via the small Gram matrix (never a d x d covariance).
// Checkpoints are thinned to at most max_rows rows.
TrajectoryPCA pca_trajectory(const std::vector<ConstSpan>& checkpoints,
                             const std::vector<long long>& steps, int max_rows = 500);

struct CosinePoint {
  long long step = 0;
  double cos_next = 0;  // cos(theta_t, theta_{t+1})
  double cos_init = 0;  // cos(theta_t, theta_0)
};

std::vector<CosinePoint> cosine_track(const std::vector<ConstSpan>& checkpoints,
                                      const std::vector<long long>& steps);

}  // namespace groklab
