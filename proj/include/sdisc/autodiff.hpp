#pragma once

// Reverse-mode differentiation on a scalar Wengert list.
//
// Every node stores its primal value and the local partials towards its
// inputs, so the backward sweep is a single reverse scan over node ids.
// Dot products whose operands occupy consecutive node ids (dense layer rows
// against a packed activation vector) are stored as a (start, start, length)
// triple instead of an explicit edge list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace sdisc::ad {

class Tape;

// A scalar that is either a node on a tape or a plain constant (no tape).
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT: implicit by intent

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  std::int32_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t id, double value) : tape_(tape), id_(id), value_(value) {}

  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
  double value_ = 0.0;
};

// Adjoints produced by one backward sweep. Valid until the tape is cleared or
// swept again.
class Gradients {
 public:
  Gradients(const Tape* tape, std::span<const double> adjoints) : tape_(tape), adj_(adjoints) {}

  double operator[](const Var& v) const;
  std::vector<double> of(std::span<const Var> vars) const;

 private:
  const Tape* tape_;
  std::span<const double> adj_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double value);
  // Leaves with consecutive ids.
  std::vector<Var> variables(std::span<const double> values);

  std::size_t size() const noexcept { return values_.size(); }
  // Drops all nodes; keeps allocated capacity.
  void clear();

  Gradients backward(const Var& loss);

  // Node builders used by the operator overloads.
  Var unary(double value, const Var& x, double dx);
  Var binary(double value, const Var& a, double da, const Var& b, double db);
  Var linear(double value, std::span<const Var> xs, std::span<const double> coeffs);
  Var dot(std::span<const Var> a, std::span<const Var> b, const Var& bias);
  // Copies xs into consecutive nodes (identity edges), unless already packed.
  std::vector<Var> pack(std::span<const Var> xs);

 private:
  struct Edge {
    std::int32_t id;
    double partial;
  };
  struct Pair {
    std::int32_t a;
    std::int32_t b;
  };
  struct Node {
    std::uint32_t edge_begin, edge_end;
    std::uint32_t pair_begin, pair_end;
    std::int32_t block_a = -1, block_b = -1;
    std::uint32_t block_len = 0;
  };

  Var push(double value);
  void check_owner(const Var& v) const;

  std::vector<double> values_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Pair> pairs_;
  std::vector<double> adjoints_;
};

// Tape selection for mixed operands; throws state_error when two operands live
// on different tapes.
Tape* common_tape(const Var& a, const Var& b);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var sin(const Var& x);
Var cos(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var sqrt(const Var& x);
Var atan2(const Var& y, const Var& x);
Var relu(const Var& x);
// log(1 + e^x), evaluated without overflow.
Var softplus(const Var& x);
Var square(const Var& x);

Var sum(std::span<const Var> xs);
Var dot(std::span<const Var> a, std::span<const Var> b, const Var& bias = Var(0.0));
// sum_i coeffs[i] * xs[i]
Var linear(std::span<const Var> xs, std::span<const double> coeffs);
std::vector<Var> pack(std::span<const Var> xs);

// Plain-double overloads so model code can be written once over the scalar
// type.
inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double atan2(double y, double x) { return std::atan2(y, x); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double square(double x) { return x * x; }
double sum(std::span<const double> xs);
double dot(std::span<const double> a, std::span<const double> b, double bias = 0.0);
double linear(std::span<const double> xs, std::span<const double> coeffs);
inline std::vector<double> pack(std::span<const double> xs) { return {xs.begin(), xs.end()}; }

}  // namespace sdisc::ad
