#include "groklab/intrinsic_dim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace groklab {

PointCloud make_cloud(std::vector<double> flat, std::size_t n, std::size_t dim) {
  if (dim == 0 || n * dim != flat.size()) throw RuntimeFault("make_cloud: shape mismatch");
  for (double v : flat)
    if (!std::isfinite(v)) throw RuntimeFault("make_cloud: non-finite coordinate");

  // drop exact duplicate rows
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    const double* ra = flat.data() + a * dim;
    const double* rb = flat.data() + b * dim;
    return std::lexicographical_compare(ra, ra + dim, rb, rb + dim);
  };
  auto row_eq = [&](std::size_t a, std::size_t b) {
    const double* ra = flat.data() + a * dim;
    const double* rb = flat.data() + b * dim;
    return std::equal(ra, ra + dim, rb);
  };
  std::sort(order.begin(), order.end(), row_less);
  std::vector<bool> drop(n, false);
  std::size_t dropped = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (row_eq(order[i - 1], order[i])) {
      drop[order[i]] = true;
      ++dropped;
    }

  PointCloud c;
  c.dim = dim;
  c.duplicates_removed = dropped;
  c.n = n - dropped;
  if (c.n < 3) throw RuntimeFault("make_cloud: fewer than 3 distinct points");
  c.x.reserve(c.n * dim);
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) c.x.insert(c.x.end(), flat.begin() + static_cast<std::ptrdiff_t>(i * dim),
                             flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  return c;
}

std::vector<double> knn_distances(const PointCloud& cloud, int k) {
  if (k < 1 || static_cast<std::size_t>(k) >= cloud.n)
    throw RuntimeFault("knn_distances: need 1 <= k < n");
  const std::size_t n = cloud.n;
  const std::size_t d = cloud.dim;
  std::vector<double> out(n * static_cast<std::size_t>(k));
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = cloud.x.data() + i * d;
    for (std::size_t j = 0; j < n; ++j) {
      const double* xj = cloud.x.data() + j * d;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = xi[c] - xj[c];
        s += diff * diff;
      }
      row[j] = s;
    }
    row[i] = std::numeric_limits<double>::infinity();  // exclude self
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    for (int j = 0; j < k; ++j) {
      const double dist = std::sqrt(row[static_cast<std::size_t>(j)]);
      if (!(dist > 0.0))
        throw RuntimeFault("knn_distances: zero neighbor distance (duplicates present?)");
      out[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] = dist;
    }
  }
  return out;
}

const char* id_method_name(IdMethod m) {
  switch (m) {
    case IdMethod::mle_mean: return "mle_mean";
    case IdMethod::mle_inverse: return "mle_inverse";
    case IdMethod::twonn: return "twonn";
  }
  return "?";
}

IdMethod id_method_from_name(const std::string& s) {
  if (s == "mle_mean") return IdMethod::mle_mean;
  if (s == "mle_inverse") return IdMethod::mle_inverse;
  if (s == "twonn") return IdMethod::twonn;
  throw ConfigError("unknown intrinsic-dimension method: " + s);
}

double mle_local(ConstSpan t, int k) {
  if (k < 2 || t.size() < static_cast<std::size_t>(k))
    throw RuntimeFault("mle_local: need k >= 2 neighbor distances");
  const double tk = t[static_cast<std::size_t>(k - 1)];
  double s = 0.0;
  for (int j = 0; j < k - 1; ++j) s += std::log(tk / t[static_cast<std::size_t>(j)]);
  s /= static_cast<double>(k - 1);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / s;
}

IDEstimate mle_id(const PointCloud& cloud, int k, bool inverse_average) {
  if (k < 2) throw RuntimeFault("mle_id: k must be >= 2");
  const auto dists = knn_distances(cloud, k);
  IDEstimate est;
  est.method = inverse_average ? IdMethod::mle_inverse : IdMethod::mle_mean;
  est.k = k;
  est.n_used = cloud.n;
  double acc = 0.0;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    const double local =
        mle_local(ConstSpan(dists.data() + i * static_cast<std::size_t>(k),
                            static_cast<std::size_t>(k)),
                  k);
    acc += inverse_average ? 1.0 / local : local;
  }
  acc /= static_cast<double>(cloud.n);
  est.value = inverse_average ? (acc > 0.0 ? 1.0 / acc : 0.0) : acc;
  est.defined = std::isfinite(est.value) && est.value > 0.0;
  return est;
}

double twonn_fit_from_mu(std::vector<double> mu, double discard_top_fraction,
                         std::size_t* n_used) {
  if (!(discard_top_fraction >= 0.0 && discard_top_fraction < 0.5))
    throw RuntimeFault("twonn: discard fraction must be in [0, 0.5)");
  const std::size_t n = mu.size();
  if (n < 3) throw RuntimeFault("twonn: need at least 3 points");
  std::sort(mu.begin(), mu.end());
  std::size_t keep = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - discard_top_fraction)));
  keep = std::min(keep, n - 1);  // the i = n term is -log(0), always dropped
  if (keep < 1) throw RuntimeFault("twonn: nothing retained after discard");
  if (n_used) *n_used = keep;

  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i <= keep; ++i) {
    const double lmu = std::log(mu[i - 1]);
    const double y = -std::log(1.0 - static_cast<double>(i) / static_cast<double>(n));
    num += lmu * y;
    den += lmu * lmu;
  }
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();  // all mu == 1
  return num / den;
}

IDEstimate twonn_id(const PointCloud& cloud, double discard_top_fraction) {
  const auto dists = knn_distances(cloud, 2);
  std::vector<double> mu(cloud.n);
  for (std::size_t i = 0; i < cloud.n; ++i) mu[i] = dists[i * 2 + 1] / dists[i * 2];
  IDEstimate est;
  est.method = IdMethod::twonn;
  est.k = 2;
  est.value = twonn_fit_from_mu(std::move(mu), discard_top_fraction, &est.n_used);
  est.defined = std::isfinite(est.value) && est.value > 0.0;
  return est;
}

IDEstimate estimate_id(const PointCloud& cloud, IdMethod method, int k,
                       double discard_top_fraction) {
  switch (method) {
    case IdMethod::mle_mean: return mle_id(cloud, k, false);
    case IdMethod::mle_inverse: return mle_id(cloud, k, true);
    case IdMethod::twonn: return twonn_id(cloud, discard_top_fraction);
  }
  throw RuntimeFault("estimate_id: bad method");
}

}  // namespace groklab
