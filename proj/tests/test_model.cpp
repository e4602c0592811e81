#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/eval.hpp"
#include "sdisc/lie.hpp"
#include "sdisc/model.hpp"

using namespace sdisc;

namespace {

ModelShape shape4(int bandwidth = 1, int hidden = 6) {
  ModelShape s;
  s.n = 4;
  s.bandwidth = bandwidth;
  s.hidden = hidden;
  return s;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::size_t index_of(const std::vector<FrequencyVector>& freqs, std::vector<int> m) {
  const auto it = std::find(freqs.begin(), freqs.end(), FrequencyVector(std::move(m)));
  REQUIRE(it != freqs.end());
  return static_cast<std::size_t>(it - freqs.begin());
}

}  // namespace

TEST_CASE("zero_params chains layer shapes") {
  const ModelShape s = shape4(2, 8);
  const GeneratorParams p = zero_params(s);
  const auto freqs = primitive_set(2, 2);
  CHECK(p.skew.size() == 6);
  CHECK(p.lambda.size() == 2);
  REQUIRE(p.layers.size() == 4);
  CHECK(p.layers.front().inputs == feature_width(freqs.size(), 2));
  CHECK(p.layers.back().outputs == 1);
  CHECK_NOTHROW(validate(p, freqs));
  CHECK_THROWS_AS(validate(p, primitive_set(1, 2)), shape_error);
  std::vector<double> flat = p.flatten();
  CHECK(flat.size() == p.size());
  flat.pop_back();
  GeneratorParams q = p;
  CHECK_THROWS(q.assign(flat));
}

TEST_CASE("align: identity at zero skew, isometry, quarter-turn example") {
  GeneratorParams p = zero_params(shape4());
  const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
  const auto z0 = align(x, p);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(z0[i] == doctest::Approx(x[i]).epsilon(1e-15));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    for (double& s : p.skew) s = g(rng);
    std::vector<double> v(4);
    for (double& e : v) e = g(rng);
    CHECK(std::abs(norm(align(v, p)) - norm(v)) <= 1e-9);
  }

  ModelShape s2;
  s2.n = 2;
  s2.bandwidth = 1;
  s2.hidden = 2;
  GeneratorParams p2 = zero_params(s2);
  // A = (pi/2) J with J = [[0, -1], [1, 0]]; the free parameter is A(0, 1).
  p2.skew = {-std::numbers::pi / 2};
  const auto z = align(std::vector<double>{1.0, 0.0}, p2);
  CHECK(std::abs(z[0]) <= 1e-12);
  CHECK(z[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("featurize examples and unit-circle invariant") {
  const GeneratorParams p = zero_params(shape4(2));
  const auto freqs = primitive_set(2, 2);
  const auto fb = featurize(std::vector<double>{1.5, 0.0, 0.4, 0.0}, p, freqs);
  REQUIRE(fb.cosine.size() == freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    CHECK(fb.cosine[i] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(fb.sine[i]) <= 1e-15);
  }
  CHECK(fb.radii[0] == doctest::Approx(1.5));
  CHECK(fb.radii[1] == doctest::Approx(0.4));

  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  GeneratorParams q = p;
  for (int trial = 0; trial < 50; ++trial) {
    for (double& s : q.skew) s = g(rng);
    std::vector<double> x(4);
    for (double& e : x) e = g(rng);
    const auto f = featurize(x, q, freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      CHECK(std::abs(f.cosine[i] * f.cosine[i] + f.sine[i] * f.sine[i] - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("featurize: radii invariant and resonant features fixed under the true flow") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  GeneratorParams p = zero_params(shape4(2));
  for (double& s : p.skew) s = 0.7 * g(rng);
  const Matrix q = alignment_matrix(p);
  const std::vector<double> lam{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  const Generator b = assemble_generator(CanonicalForm::make(q, Vector::Map(lam.data(), 2)));
  const auto freqs = primitive_set(2, 2);
  const std::size_t resonant = index_of(freqs, {1, 1});
  for (int trial = 0; trial < 30; ++trial) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = g(rng);
    const double t = 3.0 * g(rng);
    const Vector hx = matrix_exp(b, t) * x;
    const auto f0 = featurize(std::span<const double>(x.data(), 4), p, freqs);
    const auto f1 = featurize(std::span<const double>(hx.data(), 4), p, freqs);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(f0.radii[k] - f1.radii[k]) <= 1e-12);
    CHECK(std::abs(f0.cosine[resonant] - f1.cosine[resonant]) <= 1e-10);
    CHECK(std::abs(f0.sine[resonant] - f1.sine[resonant]) <= 1e-10);
  }
}

TEST_CASE("predict: zero weights give the output bias") {
  GeneratorParams p = zero_params(shape4());
  p.layers.back().bias = {0.37};
  const auto freqs = primitive_set(1, 2);
  const auto out = predict(std::vector<double>{1.0, 2.0, 3.0, 4.0}, p, freqs);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 0.37);
  CHECK_THROWS_AS(predict(std::vector<double>{1.0, 2.0}, p, freqs), shape_error);
}

TEST_CASE("predict: single-neuron chain evaluated by hand") {
  ModelShape s = shape4(1, 1);
  GeneratorParams p = zero_params(s);
  const auto freqs = primitive_set(1, 2);
  const int width = feature_width(freqs.size(), 2);
  // Only the first radius feeds the chain: x = (3, 4, 0, 0) has r_1 = 5.
  p.layers[0].weight[static_cast<std::size_t>(width - 2)] = 2.0;
  p.layers[0].bias = {-1.0};
  p.layers[1].weight = {0.5};
  p.layers[1].bias = {0.25};
  p.layers[2].weight = {-1.0};
  p.layers[2].bias = {10.0};
  p.layers[3].weight = {3.0};
  p.layers[3].bias = {-2.0};
  // h1 = relu(2*5 - 1) = 9; h2 = relu(4.5 + 0.25) = 4.75; h3 = relu(-4.75 + 10) = 5.25; y = 15.75 - 2.
  const auto out = predict(std::vector<double>{3.0, 4.0, 0.0, 0.0}, p, freqs);
  CHECK(out[0] == doctest::Approx(13.75).epsilon(1e-14));
  p.layers[2].bias = {1.0};
  CHECK(predict(std::vector<double>{3.0, 4.0, 0.0, 0.0}, p, freqs)[0] == doctest::Approx(-2.0));
}

TEST_CASE("predict: permuting frequencies with their first-layer columns is a relabeling") {
  const ModelShape s = shape4(2, 5);
  const GeneratorParams p = fixture::random_params(s, 14);
  const auto freqs = primitive_set(2, 2);
  std::vector<FrequencyVector> swapped = freqs;
  const std::size_t a = 1, b = 4;
  std::swap(swapped[a], swapped[b]);
  GeneratorParams q = p;
  DenseLayer& first = q.layers.front();
  for (int h = 0; h < first.outputs; ++h) {
    double* row = first.weight.data() + static_cast<std::size_t>(h) * first.inputs;
    std::swap(row[2 * a], row[2 * b]);
    std::swap(row[2 * a + 1], row[2 * b + 1]);
  }
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(4);
    for (double& e : x) e = g(rng);
    CHECK(predict(x, p, freqs)[0] == doctest::Approx(predict(x, q, swapped)[0]).epsilon(1e-13));
  }
  const Predictor f(p, freqs);
  const std::vector<double> x{0.1, 0.2, -0.3, 0.4};
  CHECK(f(x)[0] == predict(x, p, freqs)[0]);
}

TEST_CASE("coefficient_norms examples") {
  const auto freqs = primitive_set(1, 2);
  GeneratorParams p = zero_params(shape4(1, 3));
  for (const auto& [m, c] : coefficient_norms(p, freqs)) CHECK(c == 0.0);

  const std::size_t i11 = index_of(freqs, {1, 1});
  p.layers[0].weight[2 * i11] = 3.0;
  auto norms = coefficient_norms(p, freqs);
  CHECK(norms.at(FrequencyVector({1, 1})) == 3.0);
  CHECK(norms.at(FrequencyVector({1, 0})) == 0.0);

  ModelShape one = shape4(1, 1);
  GeneratorParams q = zero_params(one);
  const std::size_t i10 = index_of(freqs, {1, 0});
  q.layers[0].weight[2 * i10] = 3.0;
  q.layers[0].weight[2 * i10 + 1] = 4.0;
  CHECK(coefficient_norms(q, freqs).at(FrequencyVector({1, 0})) == doctest::Approx(5.0).epsilon(1e-15));

  // Spread across hidden units: sqrt(1 + 4 + 4) = 3.
  GeneratorParams w = zero_params(shape4(1, 3));
  const int width = w.layers[0].inputs;
  w.layers[0].weight[2 * i10] = 1.0;
  w.layers[0].weight[static_cast<std::size_t>(width) + 2 * i10 + 1] = 2.0;
  w.layers[0].weight[static_cast<std::size_t>(2 * width) + 2 * i10] = -2.0;
  CHECK(coefficient_norms(w, freqs).at(FrequencyVector({1, 0})) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("resonance_penalty examples") {
  const auto freqs = primitive_set(1, 2);
  GeneratorParams p = zero_params(shape4(1, 2));
  p.lambda = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  CHECK(resonance_penalty(p, freqs) == 0.0);
  p.layers[0].weight[2 * index_of(freqs, {1, 1})] = 1.7;
  CHECK(std::abs(resonance_penalty(p, freqs)) <= 1e-30);

  GeneratorParams q = zero_params(shape4(1, 1));
  q.lambda = {1.0, 0.0};
  q.layers[0].weight[2 * index_of(freqs, {1, 0})] = 2.0;
  CHECK(resonance_penalty(q, freqs) == doctest::Approx(4.0).epsilon(1e-15));

  // Penalty is sum over m of C_m^2 <m, lambda>^2 for random parameters.
  const GeneratorParams r = fixture::random_params(shape4(2, 4), 16);
  const auto f2 = primitive_set(2, 2);
  const auto norms = coefficient_norms(r, f2);
  double want = 0.0;
  for (const auto& m : f2) {
    const double d = m[0] * r.lambda[0] + m[1] * r.lambda[1];
    want += norms.at(m) * norms.at(m) * d * d;
  }
  CHECK(resonance_penalty(r, f2) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("exact invariance certificate") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int bandwidth : {1, 2}) {
    const auto freqs = primitive_set(bandwidth, 2);
    GeneratorParams p = fixture::random_params(shape4(bandwidth, 6), 18 + bandwidth);
    p.lambda = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    DenseLayer& first = p.layers.front();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (std::abs(inner(freqs[i], p.lambda)) < 1e-12) continue;
      for (int h = 0; h < first.outputs; ++h) {
        first.weight[static_cast<std::size_t>(h) * first.inputs + 2 * i] = 0.0;
        first.weight[static_cast<std::size_t>(h) * first.inputs + 2 * i + 1] = 0.0;
      }
    }
    CHECK(resonance_penalty(p, freqs) <= 1e-28);
    const Generator b = assemble_generator(CanonicalForm::make(alignment_matrix(p), Vector::Map(p.lambda.data(), 2)));
    const Predictor f(p, freqs);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(4);
      for (int i = 0; i < 4; ++i) x[i] = g(rng);
      const Vector hx = matrix_exp(b, 4.0 * g(rng)) * x;
      const double d = f(std::span<const double>(x.data(), 4))[0] - f(std::span<const double>(hx.data(), 4))[0];
      worst = std::max(worst, std::abs(d));
    }
    CHECK(worst <= 1e-9);

    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 32; ++i) {
      std::vector<double> x(4);
      for (double& e : x) e = g(rng);
      xs.push_back(x);
    }
    CHECK(invariance_error(f, xs, b, sample_t({32, 8, 3.141592653589793}, 3)) <= 1e-18);
  }
}

TEST_CASE("full objective gradient matches finite differences on a micro model") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const int bandwidth = 1 + static_cast<int>(seed % 2);
    const GeneratorParams p = fixture::random_params(shape4(bandwidth, 4), 100 + seed);
    const auto freqs = primitive_set(bandwidth, 2);
    const Dataset ds = fixture::random_dataset(4, 1, 5, 200 + seed);
    const auto res = fixture::check_objective_gradient(p, freqs, ds, 0.3, LossKind::squared_error);
    CHECK(res.parameters == p.size());
    CHECK(res.max_rel_error <= 1e-4);
  }
}
