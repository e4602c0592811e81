#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sdisc/autodiff.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/expm.hpp"

using namespace sdisc;
using ad::Tape;
using ad::Var;

namespace {

// Central difference with step 1e-6 * max(1, |p|).
double central_difference(const std::function<double(double)>& f, double p) {
  const double h = 1e-6 * std::max(1.0, std::abs(p));
  return (f(p + h) - f(p - h)) / (2.0 * h);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Checks d op / dx at x for a unary op available on both Var and double.
template <class Op>
void check_unary(Op op, double x) {
  Tape tape;
  const Var v = tape.variable(x);
  const Var y = op(v);
  CHECK(y.value() == doctest::Approx(op(x)).epsilon(1e-15));
  const double g = tape.backward(y)[v];
  CHECK(rel_err(g, central_difference([&](double p) { return op(p); }, x)) <= 1e-6);
}

}  // namespace

TEST_CASE("forward examples") {
  Tape tape;
  const Var a = tape.variable(2.0);
  const Var b = tape.variable(3.0);
  CHECK((a * b).value() == 6.0);
  CHECK(ad::atan2(tape.variable(1.0), tape.variable(0.0)).value() == doctest::Approx(std::numbers::pi / 2));
  CHECK(ad::sqrt(tape.variable(4.0)).value() == 2.0);
  CHECK((a - b).value() == -1.0);
  CHECK((a / b).value() == doctest::Approx(2.0 / 3.0));
  CHECK((-a).value() == -2.0);
}

TEST_CASE("backward examples") {
  Tape tape;
  const Var x = tape.variable(3.0);
  CHECK(tape.backward(x * x)[x] == 6.0);
  Tape t2;
  const Var z = t2.variable(0.0);
  CHECK(t2.backward(ad::sin(z))[z] == 1.0);
}

TEST_CASE("primitive ops match finite differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.2, 2.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = u(rng) * (trial % 2 ? 1.0 : -1.0);
    check_unary([](auto v) { return ad::sin(v); }, x);
    check_unary([](auto v) { return ad::cos(v); }, x);
    check_unary([](auto v) { return ad::exp(v); }, x);
    check_unary([](auto v) { return ad::square(v); }, x);
    check_unary([](auto v) { return ad::softplus(v); }, x);
    check_unary([](auto v) { return ad::relu(v); }, x);
    check_unary([](auto v) { return ad::log(v * v); }, x);
    check_unary([](auto v) { return ad::sqrt(v * v + 1.0); }, x);
    check_unary([](auto v) { return 1.0 / (v + 3.0); }, x);
  }
}

TEST_CASE("atan2 partials follow the documented formulas") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const double y0 = g(rng);
    const double x0 = g(rng);
    Tape tape;
    const Var y = tape.variable(y0);
    const Var x = tape.variable(x0);
    const auto grads = tape.backward(ad::atan2(y, x));
    const double r2 = x0 * x0 + y0 * y0;
    CHECK(grads[x] == doctest::Approx(-y0 / r2).epsilon(1e-14));
    CHECK(grads[y] == doctest::Approx(x0 / r2).epsilon(1e-14));
  }
}

TEST_CASE("numeric errors") {
  Tape tape;
  const Var z = tape.variable(0.0);
  CHECK_THROWS_AS(tape.variable(1.0) / z, numeric_error);
  CHECK_THROWS_AS(ad::sqrt(tape.variable(-1.0)), numeric_error);
  CHECK_THROWS_AS(ad::atan2(z, tape.variable(0.0)), numeric_error);
  CHECK_THROWS_AS(ad::log(tape.variable(0.0)), numeric_error);
}

TEST_CASE("backward state errors") {
  Tape empty;
  CHECK_THROWS_AS(empty.backward(Var(1.0)), state_error);
  Tape a;
  Tape b;
  const Var va = a.variable(1.0);
  b.variable(2.0);
  CHECK_THROWS_AS(b.backward(va), state_error);
  CHECK_THROWS_AS(a.backward(Var(3.0)), state_error);
  CHECK_THROWS_AS(a.variable(1.0) + b.variable(1.0), state_error);
}

TEST_CASE("reused subexpressions accumulate adjoints") {
  Tape tape;
  const Var x = tape.variable(1.5);
  const Var y = ad::sin(x) * x + x * x * x;
  const double want = std::cos(1.5) * 1.5 + std::sin(1.5) + 3 * 1.5 * 1.5;
  CHECK(tape.backward(y)[x] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("dot, linear, sum and pack gradients") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> av(7), bv(7), coeffs(7);
  for (std::size_t i = 0; i < 7; ++i) {
    av[i] = g(rng);
    bv[i] = g(rng);
    coeffs[i] = g(rng);
  }
  Tape tape;
  const auto a = tape.variables(av);
  const auto b = tape.variables(bv);
  const Var bias = tape.variable(0.7);
  // Mixed: contiguous dot, a non-contiguous dot via pack of a reversed copy,
  // a linear map and a sum.
  std::vector<Var> rev(b.rbegin(), b.rend());
  const Var d1 = ad::dot(a, b, bias);
  const Var d2 = ad::dot(std::span<const Var>(a), std::span<const Var>(rev));
  const Var d3 = ad::dot(std::span<const Var>(a), std::span<const Var>(ad::pack(rev)));
  const Var l = ad::linear(a, coeffs);
  const std::vector<Var> parts{d1, d2 * 2.0, d3 * 3.0, l};
  const Var total = ad::sum(parts);
  const auto grads = tape.backward(total);
  double want_bias = 1.0;
  CHECK(grads[bias] == doctest::Approx(want_bias));
  for (std::size_t i = 0; i < 7; ++i) {
    const double want_a = bv[i] + 5.0 * bv[6 - i] + coeffs[i];
    const double want_b = av[i] + 5.0 * av[6 - i];
    CHECK(grads[a[i]] == doctest::Approx(want_a).epsilon(1e-13));
    CHECK(grads[b[i]] == doctest::Approx(want_b).epsilon(1e-13));
  }
  CHECK(d1.value() == doctest::Approx(ad::dot(std::span<const double>(av), std::span<const double>(bv), 0.7)));
}

TEST_CASE("constants mix with tape variables") {
  Tape tape;
  const Var x = tape.variable(2.0);
  const std::vector<Var> w{Var(3.0), x, Var(0.0)};
  const std::vector<Var> in{x, Var(5.0), x};
  const Var d = ad::dot(std::span<const Var>(w), std::span<const Var>(in));
  CHECK(d.value() == 16.0);
  CHECK(tape.backward(d)[x] == 8.0);
}

TEST_CASE("gradients are zeroed between backward passes and replays are bit-identical") {
  auto run = [] {
    Tape tape;
    const Var x = tape.variable(0.3);
    const Var y = tape.variable(-1.2);
    const Var f = ad::exp(x * y) + ad::atan2(y, x) * ad::cos(x);
    auto g1 = tape.backward(f);
    const double a = g1[x];
    auto g2 = tape.backward(f);
    CHECK(g2[x] == a);
    return std::pair{g2[x], g2[y]};
  };
  CHECK(run() == run());
}

TEST_CASE("clear resets the tape") {
  Tape tape;
  tape.variable(1.0);
  tape.variable(2.0);
  CHECK(tape.size() == 2);
  tape.clear();
  CHECK(tape.size() == 0);
  const Var x = tape.variable(4.0);
  CHECK(tape.backward(x * x)[x] == 8.0);
}

TEST_CASE("expm kernel: squaring count keeps the scaled norm at or below one half") {
  CHECK(exp_squarings(0.0) == 0);
  CHECK(exp_squarings(0.5) == 0);
  CHECK(exp_squarings(0.51) == 1);
  CHECK(exp_squarings(1.0) == 1);
  CHECK(exp_squarings(1.01) == 2);
  for (double norm : {0.3, 2.0, 17.0, 1000.0}) {
    const int s = exp_squarings(norm);
    CHECK(norm / std::ldexp(1.0, s) <= 0.5);
    if (s > 0) CHECK(norm / std::ldexp(1.0, s - 1) > 0.5);
  }
}

TEST_CASE("expm on the tape matches finite differences") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const int n = 4;
  std::vector<double> a0(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      a0[i * n + j] = g(rng);
      a0[j * n + i] = -a0[i * n + j];
    }
  std::vector<double> w(n * n);
  for (double& v : w) v = g(rng);
  auto objective = [&](const std::vector<double>& a) {
    const auto e = expm<double>(a, n, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += w[i] * e[i];
    return s;
  };
  Tape tape;
  const auto av = tape.variables(a0);
  const auto e = expm<Var>(av, n, 1.0);
  std::vector<Var> terms;
  for (std::size_t i = 0; i < e.size(); ++i) terms.push_back(e[i] * w[i]);
  const auto grads = tape.backward(ad::sum(terms)).of(av);
  for (std::size_t i = 0; i < a0.size(); ++i) {
    const double fd = central_difference(
        [&](double p) {
          auto a = a0;
          a[i] = p;
          return objective(a);
        },
        a0[i]);
    CHECK(rel_err(grads[i], fd) <= 1e-6);
  }
}
