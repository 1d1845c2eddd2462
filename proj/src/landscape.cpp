#include "groklab/landscape.hpp"

#include <cmath>

#include "groklab/rng.hpp"

namespace groklab {

const char* direction_kind_name(DirectionKind k) {
  switch (k) {
    case DirectionKind::to_optimum: return "to_optimum";
    case DirectionKind::next_step: return "next_step";
    case DirectionKind::to_init: return "to_init";
    case DirectionKind::random: return "random";
  }
  return "?";
}

Direction make_direction(DirectionKind kind, const ParamVector& theta, ConstSpan target,
                         std::uint64_t seed) {
  Direction d;
  d.kind = kind;
  if (kind == DirectionKind::random) {
    Rng rng(seed);
    d.values.resize(theta.values.size());
    for (double& v : d.values) v = rng.gaussian();
    return d;
  }
  if (target.size() != theta.values.size())
    throw RuntimeFault("make_direction: target size mismatch");
  d.values.resize(theta.values.size());
  bool nonzero = false;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.values[i] = target[i] - theta.values[i];
    nonzero = nonzero || d.values[i] != 0.0;
  }
  if (!nonzero) throw RuntimeFault("make_direction: zero direction (target equals anchor)");
  return d;
}

Direction filter_normalize(const Direction& dir, const ParamVector& theta,
                           ZeroFilterPolicy policy) {
  if (dir.values.size() != theta.values.size())
    throw RuntimeFault("filter_normalize: layout mismatch");
  Direction out = dir;
  for (const auto& blk : theta.layout->blocks) {
    const int rows = blk.filter_count();
    const int len = blk.filter_len();
    for (int r = 0; r < rows; ++r) {
      double* drow = out.values.data() + blk.offset + static_cast<std::size_t>(r) * len;
      const double* trow =
          theta.values.data() + blk.offset + static_cast<std::size_t>(r) * len;
      if (len == 1) {
        // bias / gain scalar: keep the sign, take the anchor magnitude
        if (drow[0] == 0.0) {
          if (trow[0] == 0.0) continue;
          if (policy == ZeroFilterPolicy::fault)
            throw RuntimeFault("filter_normalize: zero scalar in direction at " + blk.name);
          continue;
        }
        drow[0] = (drow[0] > 0.0 ? 1.0 : -1.0) * std::abs(trow[0]);
      } else {
        double nd = 0.0, nt = 0.0;
        for (int c = 0; c < len; ++c) {
          nd += drow[c] * drow[c];
          nt += trow[c] * trow[c];
        }
        nd = std::sqrt(nd);
        nt = std::sqrt(nt);
        if (nd == 0.0) {
          if (nt == 0.0) continue;
          if (policy == ZeroFilterPolicy::fault)
            throw RuntimeFault("filter_normalize: zero-norm filter in direction at " +
                               blk.name + " row " + std::to_string(r));
          continue;
        }
        const double s = nt / nd;
        for (int c = 0; c < len; ++c) drow[c] *= s;
      }
    }
  }
  return out;
}

namespace {

LandscapeSlice eval_grid(const ParamVector& anchor, const Direction& d1, const Direction* d2,
                         const std::vector<double>& alphas, const std::vector<double>& betas,
                         const MetricFn& eval) {
  LandscapeSlice slice;
  slice.anchor_step = d1.anchor_step;
  slice.alphas = alphas;
  slice.betas = d2 ? betas : std::vector<double>{};
  std::vector<double> theta(anchor.values.size());
  const std::size_t inner = d2 ? betas.size() : 1;
  slice.points.reserve(alphas.size() * inner);
  for (double a : alphas) {
    for (std::size_t bi = 0; bi < inner; ++bi) {
      const double b = d2 ? betas[bi] : 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        double v = anchor.values[i] + a * d1.values[i];
        if (d2) v += b * d2->values[i];
        theta[i] = v;
      }
      slice.points.push_back(eval(theta));
    }
  }
  return slice;
}

}  // namespace

LandscapeSlice slice_1d(const ParamVector& anchor, const Direction& dir,
                        const std::vector<double>& alphas, const MetricFn& eval) {
  if (alphas.empty()) throw RuntimeFault("slice_1d: empty grid");
  bool has_zero = false;
  for (double a : alphas) has_zero = has_zero || a == 0.0;
  if (!has_zero) throw RuntimeFault("slice_1d: grid must contain 0");
  if (dir.values.size() != anchor.values.size())
    throw RuntimeFault("slice_1d: layout mismatch");
  return eval_grid(anchor, dir, nullptr, alphas, {}, eval);
}

LandscapeSlice slice_2d(const ParamVector& anchor, const Direction& d1, const Direction& d2,
                        const std::vector<double>& alphas, const std::vector<double>& betas,
                        const MetricFn& eval) {
  if (alphas.empty() || betas.empty()) throw RuntimeFault("slice_2d: empty grid");
  if (d1.values.size() != anchor.values.size() || d2.values.size() != anchor.values.size())
    throw RuntimeFault("slice_2d: layout mismatch");
  const double c = cosine(d1.values, d2.values);
  if (std::abs(c) >= 0.99)
    throw RuntimeFault("slice_2d: directions are collinear (|cos| >= 0.99)");
  return eval_grid(anchor, d1, &d2, alphas, betas, eval);
}

ConvexityReport segment_convexity(const std::vector<double>& alphas,
                                  const std::vector<double>& values, double tol) {
  if (alphas.size() != values.size() || alphas.size() < 3)
    throw RuntimeFault("segment_convexity: need a 1D slice with >= 3 points");
  ConvexityReport rep;
  rep.tol = tol;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double x0 = alphas[i - 1], x1 = alphas[i], x2 = alphas[i + 1];
    const double lerp = values[i - 1] + (values[i + 1] - values[i - 1]) * (x1 - x0) / (x2 - x0);
    if (values[i] > lerp + tol) rep.violations.push_back(i);
  }
  return rep;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw RuntimeFault("linspace: n must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

}  // namespace groklab
