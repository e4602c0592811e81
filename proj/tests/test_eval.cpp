#include <doctest.h>

#include <cmath>
#include <random>

#include "sdisc/errors.hpp"
#include "sdisc/eval.hpp"
#include "sdisc/model.hpp"

using namespace sdisc;

namespace {

// Constant predictor: all weights zero, output bias c.
Predictor constant(double c, int n = 2) {
  ModelShape s;
  s.n = n;
  s.bandwidth = 1;
  s.hidden = 2;
  GeneratorParams p = zero_params(s);
  p.layers.back().bias = {c};
  return Predictor(p, primitive_set(1, n / 2));
}

Dataset rows2(std::vector<double> x, std::vector<double> y) {
  Dataset ds;
  ds.n = 2;
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.meta.n = 2;
  return ds;
}

}  // namespace

TEST_CASE("test_mse examples") {
  const std::vector<std::size_t> all{0, 1};
  CHECK(test_mse(constant(0.5), rows2({1, 0, 0, 1}, {0.5, 0.5}), all) == 0.0);
  CHECK(test_mse(constant(0.0), rows2({1, 0, 0, 1}, {1.0, -1.0}), all) == 1.0);
  // Residuals 2 - 0.25 = 1.75 and -1 - 0.25 = -1.25: (3.0625 + 1.5625) / 2.
  CHECK(test_mse(constant(0.25), rows2({1, 0, 0, 1}, {2.0, -1.0}), all) == doctest::Approx(2.3125).epsilon(1e-15));
  const std::vector<std::size_t> first{0};
  CHECK(test_mse(constant(0.25), rows2({1, 0, 0, 1}, {2.0, -1.0}), first) == doctest::Approx(3.0625));
  CHECK_THROWS_AS(test_mse(constant(0.0), rows2({1, 0}, {1.0}), std::vector<std::size_t>{}), argument_error);
}

TEST_CASE("test_accuracy thresholds logits at zero") {
  const Dataset ds = rows2({1, 0, 0, 1, 1, 1}, {1.0, 0.0, 1.0});
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK(test_accuracy(constant(0.3), ds, all) == doctest::Approx(2.0 / 3.0));
  CHECK(test_accuracy(constant(-0.3), ds, all) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("invariance_error examples") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 64; ++i) xs.push_back({g(rng), g(rng)});
  const Generator j = Generator::from_matrix(planar_generator());
  const auto ts = sample_t({64, 12, 3.141592653589793}, 5);

  CHECK(invariance_error(constant(0.7), xs, j, ts) <= 1e-12);

  // A radius-only model is exactly invariant under planar rotation.
  ModelShape s;
  s.n = 2;
  s.bandwidth = 1;
  s.hidden = 3;
  GeneratorParams p = zero_params(s);
  p.layers[0].weight[2] = 1.0;
  for (std::size_t l = 1; l < p.layers.size(); ++l)
    for (double& w : p.layers[l].weight) w = 0.8;
  const Predictor radial(p, primitive_set(1, 1));
  CHECK(radial(xs[0])[0] != 0.0);
  CHECK(invariance_error(radial, xs, j, ts) <= 1e-12);

  const VectorFunction first_coord = [](std::span<const double> x) { return std::vector<double>{x[0]}; };
  const std::vector<double> zero_grid{0.0};
  CHECK(invariance_error(first_coord, xs, j, zero_grid) == 0.0);

  // Closed form for f(x) = x1: (x1 (1 - cos t) + x2 sin t)^2 averaged over the fixed grid.
  double want = 0.0;
  for (const auto& x : xs)
    for (double t : ts) want += std::pow(x[0] * (1.0 - std::cos(t)) + x[1] * std::sin(t), 2);
  want /= static_cast<double>(xs.size() * ts.size());
  const double got = invariance_error(first_coord, xs, j, ts);
  CHECK(got > 0.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  // Large-sample mean approaches E = 2 - 2 cos t averaged over the grid.
  std::vector<std::vector<double>> many;
  for (int i = 0; i < 20000; ++i) many.push_back({g(rng), g(rng)});
  double expect = 0.0;
  for (double t : ts) expect += 2.0 - 2.0 * std::cos(t);
  expect /= static_cast<double>(ts.size());
  CHECK(invariance_error(first_coord, many, j, ts) == doctest::Approx(expect).epsilon(0.05));

  CHECK_THROWS_AS(invariance_error(first_coord, std::vector<std::vector<double>>{}, j, ts), argument_error);
}

TEST_CASE("sample_t is deterministic and bounded") {
  const InvarianceBudget b{10, 100, 2.0};
  const auto a = sample_t(b, 3);
  CHECK(a == sample_t(b, 3));
  CHECK(a != sample_t(b, 4));
  CHECK(a.size() == 100);
  for (double t : a) {
    CHECK(t >= -2.0);
    CHECK(t <= 2.0);
  }
}
