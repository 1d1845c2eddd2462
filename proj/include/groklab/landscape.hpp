#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "groklab/param_vector.hpp"

namespace groklab {

enum class DirectionKind { to_optimum, next_step, to_init, random };

const char* direction_kind_name(DirectionKind k);

struct Direction {
  std::vector<double> values;
  DirectionKind kind = DirectionKind::random;
  long long anchor_step = 0;
};

// Raw (unnormalized) direction: target - theta for the difference kinds, a
// standard-normal draw for random. A zero difference is an error.
Direction make_direction(DirectionKind kind, const ParamVector& theta, ConstSpan target,
                         std::uint64_t seed = 0);

enum class ZeroFilterPolicy { fault, leave_zero };

// Rescales each filter (weight-matrix row, embedding row) of the direction to
// the corresponding filter norm of theta; bias and gain scalars keep their
// sign and take the anchor's magnitude. Removes weight-scale artifacts from
// slice plots.
Direction filter_normalize(const Direction& dir, const ParamVector& theta,
                           ZeroFilterPolicy policy = ZeroFilterPolicy::fault);

struct SlicePoint {
  double train_loss = 0, val_loss = 0;
  double train_acc = 0, val_acc = 0;
};

using MetricFn = std::function<SlicePoint(ConstSpan params)>;

struct LandscapeSlice {
  long long anchor_step = 0;
  std::vector<double> alphas;
  std::vector<double> betas;        // empty for 1D
  std::vector<SlicePoint> points;   // row-major, alpha outer for 2D
};

// f(alpha) = metrics(theta + alpha * dir) over the grid; the grid must
// contain 0 so the anchor's own metrics appear in the slice.
LandscapeSlice slice_1d(const ParamVector& anchor, const Direction& dir,
                        const std::vector<double>& alphas, const MetricFn& eval);

// f(alpha, beta) = metrics(theta + alpha * d1 + beta * d2); directions must
// not be collinear (|cos| < 0.99).
LandscapeSlice slice_2d(const ParamVector& anchor, const Direction& d1, const Direction& d2,
                        const std::vector<double>& alphas, const std::vector<double>& betas,
                        const MetricFn& eval);

struct ConvexityReport {
  std::vector<std::size_t> violations;  // interior grid indices failing midpoint convexity
  double tol = 0;
};

// Midpoint-convexity scan of a 1D value series over its grid; an empty
// report means the segment looks convex at grid resolution.
ConvexityReport segment_convexity(const std::vector<double>& alphas,
                                  const std::vector<double>& values, double tol = 1e-9);

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace groklab
