#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "groklab/dataset.hpp"
#include "groklab/landscape.hpp"
#include "groklab/model.hpp"
#include "groklab/rng.hpp"

using namespace groklab;

namespace {

// toy layout: one 4x5 weight matrix and a 3-entry bias
ParamVector toy_params() {
  auto layout = std::make_shared<ParamLayout>();
  ParamBlock w;
  w.name = "w";
  w.kind = ParamKind::weight_matrix;
  w.shape = {4, 5};
  w.offset = 0;
  ParamBlock b;
  b.name = "b";
  b.kind = ParamKind::bias;
  b.shape = {3};
  b.offset = 20;
  layout->blocks = {w, b};
  layout->total = 23;
  ParamVector p = make_params(layout);
  Rng rng(99);
  for (double& v : p.values) v = rng.gaussian();
  return p;
}

MetricFn quadratic_metric() {
  return [](ConstSpan theta) {
    SlicePoint p;
    double s = 0.0;
    for (double v : theta) s += v * v;
    p.train_loss = 0.5 * s;
    p.val_loss = 0.5 * s;
    return p;
  };
}

double row_norm(ConstSpan values, std::size_t offset, int len) {
  double s = 0.0;
  for (int c = 0; c < len; ++c) s += values[offset + static_cast<std::size_t>(c)] *
                                     values[offset + static_cast<std::size_t>(c)];
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("direction construction") {
  const ParamVector theta = toy_params();

  // zero difference is rejected
  CHECK_THROWS_AS(make_direction(DirectionKind::to_init, theta, theta.values), RuntimeFault);

  // next_step from a plain sgd update is anti-parallel to the gradient
  Rng rng(4);
  std::vector<double> grad(theta.values.size());
  for (double& g : grad) g = rng.gaussian();
  std::vector<double> next(theta.values.size());
  const double lr = 0.05;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = theta.values[i] - lr * grad[i];
  const Direction d = make_direction(DirectionKind::next_step, theta, next);
  std::vector<double> neg_grad(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) neg_grad[i] = -grad[i];
  CHECK(cosine(d.values, neg_grad) == doctest::Approx(1.0).epsilon(1e-12));

  const Direction r1 = make_direction(DirectionKind::random, theta, {}, 7);
  const Direction r2 = make_direction(DirectionKind::random, theta, {}, 7);
  const Direction r3 = make_direction(DirectionKind::random, theta, {}, 8);
  CHECK(r1.values == r2.values);
  CHECK(r1.values != r3.values);
}

TEST_CASE("filter normalization fixed point and norms") {
  const ParamVector theta = toy_params();

  Direction d;
  d.values = theta.values;
  const Direction out = filter_normalize(d, theta);
  CHECK(out.values == theta.values);  // self-normalization is exact

  Direction rnd = make_direction(DirectionKind::random, theta, {}, 3);
  const Direction n1 = filter_normalize(rnd, theta);
  for (const auto& blk : theta.layout->blocks) {
    const int len = blk.filter_len();
    for (int r = 0; r < blk.filter_count(); ++r) {
      const std::size_t off = blk.offset + static_cast<std::size_t>(r) * len;
      CHECK(row_norm(n1.values, off, len) ==
            doctest::Approx(row_norm(theta.values, off, len)).epsilon(1e-12));
    }
  }

  // idempotence
  const Direction n2 = filter_normalize(n1, theta);
  for (std::size_t i = 0; i < n1.values.size(); ++i)
    CHECK(n2.values[i] == doctest::Approx(n1.values[i]).epsilon(1e-12));

  // positive scaling is invisible
  Direction scaled = rnd;
  for (double& v : scaled.values) v *= 7.5;
  const Direction n3 = filter_normalize(scaled, theta);
  for (std::size_t i = 0; i < n1.values.size(); ++i)
    CHECK(n3.values[i] == doctest::Approx(n1.values[i]).epsilon(1e-12));

  // doubling the anchor direction also lands on the anchor
  Direction twice;
  twice.values = theta.values;
  for (double& v : twice.values) v *= 2.0;
  const Direction n4 = filter_normalize(twice, theta);
  for (std::size_t i = 0; i < theta.values.size(); ++i)
    CHECK(n4.values[i] == doctest::Approx(theta.values[i]).epsilon(1e-12));

  // negative scaling flips weight rows but keeps their norms
  Direction neg = rnd;
  for (double& v : neg.values) v *= -1.0;
  const Direction n5 = filter_normalize(neg, theta);
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(n5.values[i] == doctest::Approx(-n1.values[i]).epsilon(1e-12));
}

TEST_CASE("filter normalization zero handling") {
  const ParamVector theta = toy_params();
  Direction d = make_direction(DirectionKind::random, theta, {}, 11);

  std::fill(d.values.begin(), d.values.begin() + 5, 0.0);  // first weight row
  CHECK_THROWS_AS(filter_normalize(d, theta), RuntimeFault);
  const Direction kept = filter_normalize(d, theta, ZeroFilterPolicy::leave_zero);
  for (int c = 0; c < 5; ++c) CHECK(kept.values[static_cast<std::size_t>(c)] == 0.0);

  Direction db = make_direction(DirectionKind::random, theta, {}, 12);
  db.values[20] = 0.0;  // bias scalar with a non-zero anchor value
  CHECK_THROWS_AS(filter_normalize(db, theta), RuntimeFault);
  CHECK_NOTHROW(filter_normalize(db, theta, ZeroFilterPolicy::leave_zero));
}

TEST_CASE("1d slice of a quadratic matches the analytic curve") {
  ParamVector anchor = toy_params();
  std::fill(anchor.values.begin(), anchor.values.end(), 0.0);
  Direction d;
  d.values.assign(anchor.values.size(), 0.0);
  d.values[2] = 1.0;  // exact unit direction
  const auto alphas = linspace(-3.0, 3.0, 41);
  const LandscapeSlice slice = slice_1d(anchor, d, alphas, quadratic_metric());
  REQUIRE(slice.points.size() == alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i)
    CHECK(slice.points[i].train_loss ==
          doctest::Approx(0.5 * alphas[i] * alphas[i]).epsilon(1e-9));
}

TEST_CASE("slice anchors reproduce recorded metrics on a real model") {
  ModelConfig mc;
  mc.arch = Arch::mlp;
  mc.width = 8;
  mc.vocab_size = 9;
  mc.answer_classes = 7;
  const Model model(mc);
  ParamVector anchor = model.init_params(1);
  const Dataset ds = build_dataset(OpKind::mod_add, 7, 7, false);
  const Batch tb = batch_encode({0, 3, 9, 12}, ds);
  const Batch vb = batch_encode({20, 25, 31}, ds);

  MetricFn eval = [&](ConstSpan theta) {
    SlicePoint p;
    const LossReport t = model.forward_loss(theta, tb);
    const LossReport v = model.forward_loss(theta, vb);
    p.train_loss = t.loss;
    p.train_acc = t.accuracy;
    p.val_loss = v.loss;
    p.val_acc = v.accuracy;
    return p;
  };
  const std::vector<double> before = anchor.values;
  Direction d = filter_normalize(make_direction(DirectionKind::random, anchor, {}, 5), anchor);
  const LandscapeSlice slice = slice_1d(anchor, d, linspace(-1.0, 1.0, 11), eval);
  CHECK(anchor.values == before);  // slicing never mutates the anchor

  const double f0 = slice.points[5].train_loss;  // alpha = 0 sits mid-grid
  CHECK(slice.alphas[5] == 0.0);
  CHECK(f0 == doctest::Approx(model.forward_loss(before, tb).loss).epsilon(1e-9));
}

TEST_CASE("slice grid must contain zero") {
  ParamVector anchor = toy_params();
  const Direction d = make_direction(DirectionKind::random, anchor, {}, 2);
  CHECK_THROWS_AS(slice_1d(anchor, d, {0.5, 1.0}, quadratic_metric()), RuntimeFault);
}

TEST_CASE("2d slice of a quadratic and collinearity guard") {
  ParamVector anchor = toy_params();
  std::fill(anchor.values.begin(), anchor.values.end(), 0.0);
  Direction d1, d2;
  d1.values.assign(anchor.values.size(), 0.0);
  d2.values.assign(anchor.values.size(), 0.0);
  d1.values[0] = 1.0;
  d2.values[1] = 1.0;
  const auto alphas = linspace(-1.0, 2.0, 7);
  const auto betas = linspace(-1.0, 1.0, 5);
  const LandscapeSlice s = slice_2d(anchor, d1, d2, alphas, betas, quadratic_metric());
  REQUIRE(s.points.size() == alphas.size() * betas.size());
  for (std::size_t ai = 0; ai < alphas.size(); ++ai)
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      const double expect = 0.5 * (alphas[ai] * alphas[ai] + betas[bi] * betas[bi]);
      CHECK(s.points[ai * betas.size() + bi].train_loss ==
            doctest::Approx(expect).epsilon(1e-9));
    }

  CHECK_THROWS_AS(slice_2d(anchor, d1, d1, alphas, betas, quadratic_metric()), RuntimeFault);
}

TEST_CASE("slice values are order independent") {
  ParamVector anchor = toy_params();
  const Direction d =
      filter_normalize(make_direction(DirectionKind::random, anchor, {}, 21), anchor);
  const auto fwd = linspace(-1.0, 1.0, 9);
  std::vector<double> rev(fwd.rbegin(), fwd.rend());
  const LandscapeSlice a = slice_1d(anchor, d, fwd, quadratic_metric());
  const LandscapeSlice b = slice_1d(anchor, d, rev, quadratic_metric());
  for (std::size_t i = 0; i < fwd.size(); ++i)
    CHECK(a.points[i].train_loss == b.points[fwd.size() - 1 - i].train_loss);
}

TEST_CASE("segment convexity") {
  const auto alphas = linspace(-2.0, 2.0, 41);
  std::vector<double> quad, cosine_vals, two_minima;
  for (double a : alphas) quad.push_back(0.5 * a * a);
  CHECK(segment_convexity(alphas, quad).violations.empty());

  const auto grid = linspace(0.0, 6.283185307179586, 101);
  for (double a : grid) cosine_vals.push_back(std::cos(a));
  const ConvexityReport rep = segment_convexity(grid, cosine_vals);
  CHECK_FALSE(rep.violations.empty());
  for (std::size_t idx : rep.violations) {
    // violations sit exactly where the curvature is negative: cos(a) > 0
    CHECK(std::cos(grid[idx]) > 0.0);
  }
  // and every interior strongly-concave point is caught
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
    if (std::cos(grid[i]) > 0.1)
      CHECK(std::find(rep.violations.begin(), rep.violations.end(), i) != rep.violations.end());

  for (double a : alphas) two_minima.push_back((a * a - 1.0) * (a * a - 1.0));
  const ConvexityReport w = segment_convexity(alphas, two_minima);
  CHECK_FALSE(w.violations.empty());
  bool between = false;
  for (std::size_t idx : w.violations) between = between || std::abs(alphas[idx]) < 1.0;
  CHECK(between);  // the barrier between the two minima is concave
}

TEST_CASE("linspace hits symmetric zero") {
  const auto v = linspace(-3.0, 3.0, 201);
  CHECK(v.size() == 201);
  CHECK(v[100] == 0.0);
  CHECK(v.front() == -3.0);
  CHECK(v.back() == 3.0);
}
