#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "groklab/common.hpp"

namespace groklab {

// n points in ambient dimension dim, row-major. Exact duplicate rows are
// removed on construction (zero neighbor distances would break the
// log-ratio estimators); the removed count is kept for reporting.
struct PointCloud {
  std::vector<double> x;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t duplicates_removed = 0;
};

PointCloud make_cloud(std::vector<double> flat, std::size_t n, std::size_t dim);

// Exact Euclidean k-nearest-neighbor distances, sorted ascending per point
// (n x k row-major). Brute force; fine at the cloud sizes used here.
std::vector<double> knn_distances(const PointCloud& cloud, int k);

enum class IdMethod { mle_mean, mle_inverse, twonn };

const char* id_method_name(IdMethod m);
IdMethod id_method_from_name(const std::string& s);

struct IDEstimate {
  IdMethod method = IdMethod::mle_inverse;
  int k = 2;
  double value = 0.0;
  std::size_t n_used = 0;
  bool defined = false;
};

// Local likelihood estimate [1/(k-1) sum_j log(T_k/T_j)]^-1 from one point's
// sorted neighbor distances.
double mle_local(ConstSpan neighbor_dists, int k);

// Neighborhood-likelihood estimate, aggregated over points either by a plain
// mean of the local estimates or by inverting the mean of their inverses.
IDEstimate mle_id(const PointCloud& cloud, int k, bool inverse_average);

// Fit stage of the two-nearest-neighbor estimator: least squares through the
// origin of -log(1 - F(mu)) against log(mu), with the top fraction of mu
// values discarded (the largest always is; its empirical cumulate is 1).
double twonn_fit_from_mu(std::vector<double> mu, double discard_top_fraction,
                         std::size_t* n_used = nullptr);

IDEstimate twonn_id(const PointCloud& cloud, double discard_top_fraction = 0.1);

IDEstimate estimate_id(const PointCloud& cloud, IdMethod method, int k,
                       double discard_top_fraction);

}  // namespace groklab
