#include "groklab/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "groklab/rng.hpp"

namespace groklab {

namespace {

struct PowerResult {
  double lambda = 0;
  std::vector<double> vec;
  int iterations = 0;
  bool converged = false;
};

// dominant eigenpair of op (assumed symmetric with nonnegative dominant
// eigenvalue); convergence on the absolute residual ||op v - lambda v||
PowerResult power_iterate(const std::function<void(ConstSpan, Span)>& op, std::size_t dim,
                          double tol, int max_iter, Rng& rng) {
  PowerResult res;
  std::vector<double> v(dim), w(dim);
  for (double& x : v) x = rng.gaussian();
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  for (int it = 1; it <= max_iter; ++it) {
    op(v, w);
    res.lambda = dot(v, w);
    double resid = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double r = w[i] - res.lambda * v[i];
      resid += r * r;
    }
    resid = std::sqrt(resid);
    res.iterations = it;
    if (resid <= tol) {
      res.converged = true;
      break;
    }
    const double nw = norm2(w);
    if (nw == 0.0) {  // operator annihilates v: eigenvalue 0, exactly converged
      res.lambda = 0.0;
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / nw;
  }
  res.vec = std::move(v);
  return res;
}

double residual_of(const HvpFn& hvp, ConstSpan v, double lambda) {
  std::vector<double> w(v.size());
  hvp(v, w);
  double resid = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = w[i] - lambda * v[i];
    resid += r * r;
  }
  return std::sqrt(resid);
}

}  // namespace

CurvatureEstimate extremal_eigs(const HvpFn& hvp, std::size_t dim, double tol, int max_iter,
                                std::uint64_t seed) {
  if (!(tol > 0.0)) throw RuntimeFault("extremal_eigs: tol must be positive");
  if (dim == 0) throw RuntimeFault("extremal_eigs: empty parameter space");
  Rng rng(seed + 0x9E3779B97F4A7C15ull);

  // crude spectral-norm bound so the shifted operator has a nonnegative
  // dominant eigenvalue
  double bound = 0.0;
  {
    std::vector<double> v(dim), w(dim);
    for (double& x : v) x = rng.gaussian();
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    for (int it = 0; it < 8; ++it) {
      hvp(v, w);
      const double nw = norm2(w);
      bound = std::max(bound, nw);
      if (nw == 0.0) break;
      for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / nw;
    }
  }
  const double shift = 2.0 * bound + 1.0;

  CurvatureEstimate est;
  auto shifted_up = [&](ConstSpan v, Span out) {
    hvp(v, out);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += shift * v[i];
  };
  PowerResult top = power_iterate(shifted_up, dim, tol, max_iter, rng);
  est.lambda_max = top.lambda - shift;
  est.v_max = std::move(top.vec);
  est.iterations_max = top.iterations;
  est.converged_max = top.converged;
  est.residual_max = residual_of(hvp, est.v_max, est.lambda_max);

  auto shifted_down = [&](ConstSpan v, Span out) {
    hvp(v, out);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = est.lambda_max * v[i] - out[i];
  };
  PowerResult bot = power_iterate(shifted_down, dim, tol, max_iter, rng);
  est.lambda_min = est.lambda_max - bot.lambda;
  est.v_min = std::move(bot.vec);
  est.iterations_min = bot.iterations;
  est.converged_min = bot.converged;
  est.residual_min = residual_of(hvp, est.v_min, est.lambda_min);
  return est;
}

std::vector<ConditionPoint> condition_track(
    const std::vector<std::pair<long long, HvpFn>>& checkpoints, std::size_t dim, double tol,
    int max_iter) {
  if (checkpoints.empty()) throw RuntimeFault("condition_track: no checkpoints");
  std::vector<ConditionPoint> out;
  out.reserve(checkpoints.size());
  for (const auto& [step, hvp] : checkpoints) {
    const CurvatureEstimate est = extremal_eigs(hvp, dim, tol, max_iter, 0);
    ConditionPoint p;
    p.step = step;
    p.lambda_max = est.lambda_max;
    p.lambda_min = est.lambda_min;
    p.defined = est.condition_defined();
    p.condition = p.defined ? est.paper_condition() : 0.0;
    p.converged = est.converged_max && est.converged_min;
    out.push_back(p);
  }
  return out;
}

ExpansionCheck sgd_expansion_check(const LossFn& loss, const GradFn& grad, const HvpFn& hvp,
                                   ConstSpan theta, double step_size) {
  ExpansionCheck out;
  const std::size_t d = theta.size();
  std::vector<double> g(d), hg(d), moved(theta.begin(), theta.end());
  grad(theta, g);
  hvp(g, hg);
  out.grad_norm_sq = dot(g, g);
  out.ghg = dot(g, hg);
  out.predicted = -step_size * out.grad_norm_sq + 0.5 * step_size * step_size * out.ghg;
  for (std::size_t i = 0; i < d; ++i) moved[i] -= step_size * g[i];
  out.actual = loss(moved) - loss(theta);
  out.gap = std::abs(out.actual - out.predicted);
  return out;
}

TrajectoryPCA pca_trajectory(const std::vector<ConstSpan>& checkpoints,
                             const std::vector<long long>& steps, int max_rows) {
  const std::size_t total = checkpoints.size();
  if (total < 3) throw RuntimeFault("pca_trajectory: need at least 3 checkpoints");
  if (steps.size() != total) throw RuntimeFault("pca_trajectory: steps size mismatch");
  const std::size_t d = checkpoints[0].size();
  for (const auto& c : checkpoints)
    if (c.size() != d) throw RuntimeFault("pca_trajectory: checkpoint size mismatch");

  // rows are theta_t - theta_T for all but the final checkpoint, thinned
  std::vector<std::size_t> keep;
  const std::size_t n_all = total - 1;
  if (static_cast<int>(n_all) <= max_rows) {
    for (std::size_t i = 0; i < n_all; ++i) keep.push_back(i);
  } else {
    for (int i = 0; i < max_rows; ++i)
      keep.push_back(static_cast<std::size_t>(
          (static_cast<std::size_t>(i) * (n_all - 1)) / (static_cast<std::size_t>(max_rows) - 1)));
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  }
  const std::size_t n = keep.size();
  ConstSpan last = checkpoints.back();

  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].resize(d);
    ConstSpan c = checkpoints[keep[i]];
    for (std::size_t j = 0; j < d; ++j) rows[i][j] = c[j] - last[j];
  }

  // small Gram matrix
  std::vector<double> gram(n * n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double g = dot(rows[i], rows[j]);
      gram[i * n + j] = g;
      gram[j * n + i] = g;
      if (i == j) trace += g;
    }

  auto gram_op = [&](const std::vector<double>& v, std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += gram[i * n + j] * v[j];
      w[i] = s;
    }
  };

  // top-2 eigenpairs of the PSD Gram matrix by power iteration + deflation
  Rng rng(12345);
  auto top_eig = [&](const std::vector<double>* deflate_u,
                     std::vector<double>& u_out) -> double {
    std::vector<double> v(n), w(n);
    for (double& x : v) x = rng.gaussian();
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
      gram_op(v, w);
      if (deflate_u) {
        // project out the leading eigenvector rather than subtracting
        // lambda1 * u1 u1^T v; this stays stable when u1 is approximate
        const double proj = dot(w, *deflate_u);
        for (std::size_t i = 0; i < n; ++i) w[i] -= proj * (*deflate_u)[i];
      }
      lambda = dot(v, w);
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = w[i] - lambda * v[i];
        resid += r * r;
      }
      const double nw = norm2(w);
      if (std::sqrt(resid) <= 1e-13 * std::max(1.0, std::abs(lambda)) || nw == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    u_out = v;
    return std::max(lambda, 0.0);
  };

  std::vector<double> u1, u2;
  const double l1 = top_eig(nullptr, u1);
  const double l2 = top_eig(&u1, u2);
  // keep u2 orthogonal to u1
  const double p12 = dot(u2, u1);
  for (std::size_t i = 0; i < n; ++i) u2[i] -= p12 * u1[i];
  const double nu2 = norm2(u2);
  if (nu2 > 0.0)
    for (double& x : u2) x /= nu2;

  TrajectoryPCA pca;
  pca.explained1 = trace > 0.0 ? l1 / trace : 0.0;
  pca.explained2 = trace > 0.0 ? std::max(l2, 0.0) / trace : 0.0;
  if (pca.explained1 < pca.explained2) {
    std::swap(pca.explained1, pca.explained2);
    std::swap(u1, u2);
  }

  // parameter-space directions d_i = M^T u_i / sigma_i
  pca.dir1.assign(d, 0.0);
  pca.dir2.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      pca.dir1[j] += u1[i] * rows[i][j];
      pca.dir2[j] += u2[i] * rows[i][j];
    }
  const double s1 = norm2(pca.dir1);
  if (s1 > 0.0)
    for (double& x : pca.dir1) x /= s1;
  // re-orthogonalize in parameter space as well
  const double q12 = dot(pca.dir2, pca.dir1);
  for (std::size_t j = 0; j < d; ++j) pca.dir2[j] -= q12 * pca.dir1[j];
  const double s2 = norm2(pca.dir2);
  if (s2 > 0.0) {
    for (double& x : pca.dir2) x /= s2;
  } else {
    // degenerate (collinear trajectory): complete an orthonormal pair
    std::vector<double> seed_vec(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      std::fill(seed_vec.begin(), seed_vec.end(), 0.0);
      seed_vec[j] = 1.0;
      const double pr = dot(seed_vec, pca.dir1);
      for (std::size_t k2 = 0; k2 < d; ++k2) seed_vec[k2] -= pr * pca.dir1[k2];
      const double ns = norm2(seed_vec);
      if (ns > 1e-8) {
        for (std::size_t k2 = 0; k2 < d; ++k2) pca.dir2[k2] = seed_vec[k2] / ns;
        break;
      }
    }
  }

  // project every input checkpoint (the final one lands at the origin)
  pca.steps = steps;
  pca.alpha.resize(total);
  pca.beta.resize(total);
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < total; ++i) {
    ConstSpan c = checkpoints[i];
    for (std::size_t j = 0; j < d; ++j) diff[j] = c[j] - last[j];
    pca.alpha[i] = dot(diff, pca.dir1);
    pca.beta[i] = dot(diff, pca.dir2);
  }
  return pca;
}

std::vector<CosinePoint> cosine_track(const std::vector<ConstSpan>& checkpoints,
                                      const std::vector<long long>& steps) {
  if (checkpoints.size() < 2) throw RuntimeFault("cosine_track: need at least 2 checkpoints");
  if (steps.size() != checkpoints.size())
    throw RuntimeFault("cosine_track: steps size mismatch");
  std::vector<CosinePoint> out;
  out.reserve(checkpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i) {
    CosinePoint p;
    p.step = steps[i];
    p.cos_next = cosine(checkpoints[i], checkpoints[i + 1]);
    p.cos_init = cosine(checkpoints[i], checkpoints[0]);
    out.push_back(p);
  }
  return out;
}

}  // namespace groklab
