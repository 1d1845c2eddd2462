#include <doctest.h>

#include <cmath>

#include "groklab/intrinsic_dim.hpp"
#include "groklab/rng.hpp"

using namespace groklab;

namespace {

// uniform samples on a d-cube, zero-padded into the ambient dimension
PointCloud cube_cloud(int d, std::size_t n, std::size_t ambient, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pts(n * ambient, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) pts[i * ambient + static_cast<std::size_t>(c)] = rng.uniform();
  return make_cloud(std::move(pts), n, ambient);
}

}  // namespace

TEST_CASE("knn distances by hand") {
  // collinear points {0, 1, 3} on a line
  const PointCloud c = make_cloud({0.0, 1.0, 3.0}, 3, 1);
  const auto d = knn_distances(c, 2);
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(3.0));
  CHECK(d[2] == doctest::Approx(1.0));
  CHECK(d[3] == doctest::Approx(2.0));
  CHECK(d[4] == doctest::Approx(2.0));
  CHECK(d[5] == doctest::Approx(3.0));
}

TEST_CASE("neighbor distances are sorted and padding-invariant") {
  const PointCloud c = cube_cloud(3, 60, 3, 1);
  const auto d = knn_distances(c, 5);
  for (std::size_t i = 0; i < c.n; ++i)
    for (int k = 1; k < 5; ++k)
      CHECK(d[i * 5 + static_cast<std::size_t>(k)] >= d[i * 5 + static_cast<std::size_t>(k - 1)]);

  // isometric zero-padding into a larger ambient space changes nothing
  std::vector<double> padded(c.n * 16, 0.0);
  for (std::size_t i = 0; i < c.n; ++i)
    for (std::size_t j = 0; j < 3; ++j) padded[i * 16 + j] = c.x[i * 3 + j];
  const auto d2 = knn_distances(make_cloud(std::move(padded), c.n, 16), 5);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(d2[i]).epsilon(1e-12));
}

TEST_CASE("local likelihood estimate hand value") {
  const std::vector<double> t{1.0, 2.0, 4.0};
  const double expect = 2.0 / (3.0 * std::log(2.0));
  CHECK(mle_local(t, 3) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("segment embedded in 64 dimensions estimates near 1") {
  const PointCloud c = cube_cloud(1, 2000, 64, 42);
  const IDEstimate mle = mle_id(c, 2, true);
  const IDEstimate two = twonn_id(c, 0.1);
  CHECK(mle.defined);
  CHECK(two.defined);
  CHECK(mle.value >= 0.85);
  CHECK(mle.value <= 1.15);
  CHECK(two.value >= 0.85);
  CHECK(two.value <= 1.15);
}

TEST_CASE("square embedded in 128 dimensions estimates near 2") {
  const PointCloud c = cube_cloud(2, 2000, 128, 43);
  const IDEstimate mle = mle_id(c, 2, true);
  const IDEstimate two = twonn_id(c, 0.1);
  CHECK(mle.value >= 1.7);
  CHECK(mle.value <= 2.3);
  CHECK(two.value >= 1.7);
  CHECK(two.value <= 2.3);
}

TEST_CASE("twonn fit recovers an exact linear relation") {
  const std::size_t n = 500;
  std::vector<double> mu(n);
  // mu values arranged so that -log(1 - i/n) == 2 log(mu_(i)) exactly
  for (std::size_t i = 1; i <= n; ++i)
    mu[i - 1] = std::pow(1.0 - static_cast<double>(i) / static_cast<double>(n), -0.5);
  mu[n - 1] = 1e9;  // the i = n term is discarded anyway
  const double d = twonn_fit_from_mu(mu, 0.1);
  CHECK(d == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("estimates are isometry and scale invariant") {
  const PointCloud base = cube_cloud(2, 400, 8, 7);
  const IDEstimate m0 = mle_id(base, 2, true);
  const IDEstimate t0 = twonn_id(base, 0.1);

  // rotate in the (0, 5) plane and translate
  const double ca = std::cos(0.7), sa = std::sin(0.7);
  std::vector<double> moved(base.x);
  for (std::size_t i = 0; i < base.n; ++i) {
    double& x = moved[i * 8 + 0];
    double& y = moved[i * 8 + 5];
    const double nx = ca * x - sa * y + 3.5;
    const double ny = sa * x + ca * y - 1.25;
    x = nx;
    y = ny;
  }
  const PointCloud rot = make_cloud(std::move(moved), base.n, 8);
  CHECK(mle_id(rot, 2, true).value == doctest::Approx(m0.value).epsilon(1e-9));
  CHECK(twonn_id(rot, 0.1).value == doctest::Approx(t0.value).epsilon(1e-9));

  std::vector<double> scaled(base.x);
  for (double& v : scaled) v *= 37.0;
  const PointCloud big = make_cloud(std::move(scaled), base.n, 8);
  CHECK(mle_id(big, 2, true).value == doctest::Approx(m0.value).epsilon(1e-9));
  CHECK(twonn_id(big, 0.1).value == doctest::Approx(t0.value).epsilon(1e-9));
}

TEST_CASE("duplicates are removed and counted") {
  std::vector<double> pts{0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 5.0, 3.0, 7.0};
  const PointCloud c = make_cloud(std::move(pts), 5, 2);
  CHECK(c.duplicates_removed == 1);
  CHECK(c.n == 4);
  CHECK_NOTHROW(knn_distances(c, 2));

  CHECK_THROWS_AS(make_cloud({1.0, 1.0, 1.0}, 3, 1), RuntimeFault);  // collapses below 3
}

TEST_CASE("degenerate lattice flags the twonn estimate") {
  // four corners of a square: each point has two equidistant nearest
  // neighbors, so every mu is exactly 1
  const PointCloud c = make_cloud({0, 0, 0, 1, 1, 0, 1, 1}, 4, 2);
  const IDEstimate est = twonn_id(c, 0.1);
  CHECK_FALSE(est.defined);
}

TEST_CASE("mle mean and inverse modes aggregate differently") {
  const PointCloud c = cube_cloud(4, 500, 16, 11);
  const IDEstimate mean_est = mle_id(c, 6, false);
  const IDEstimate inv_est = mle_id(c, 6, true);
  CHECK(mean_est.defined);
  CHECK(inv_est.defined);
  // the harmonic-style correction never exceeds the plain mean
  CHECK(inv_est.value <= mean_est.value + 1e-12);
  CHECK(mean_est.value == doctest::Approx(4.0).epsilon(0.25));
}
