#include "sdisc/autodiff.hpp"

#include <algorithm>

#include "sdisc/errors.hpp"

namespace sdisc::ad {

namespace {

bool consecutive(std::span<const Var> xs) {
  if (xs.empty() || xs[0].is_constant()) return false;
  const Tape* tape = xs[0].tape();
  const std::int32_t first = xs[0].id();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i].tape() != tape || xs[i].id() != first + static_cast<std::int32_t>(i)) return false;
  }
  return true;
}

Tape* first_tape(std::span<const Var> xs) {
  Tape* tape = nullptr;
  for (const Var& x : xs) {
    if (x.is_constant()) continue;
    if (tape == nullptr) {
      tape = x.tape();
    } else if (tape != x.tape()) {
      throw state_error("operands live on different tapes");
    }
  }
  return tape;
}

}  // namespace

double Gradients::operator[](const Var& v) const {
  if (v.is_constant()) return 0.0;
  if (v.tape() != tape_ || static_cast<std::size_t>(v.id()) >= adj_.size()) {
    throw state_error("variable does not belong to the differentiated tape");
  }
  return adj_[static_cast<std::size_t>(v.id())];
}

std::vector<double> Gradients::of(std::span<const Var> vars) const {
  std::vector<double> out;
  out.reserve(vars.size());
  for (const Var& v : vars) out.push_back((*this)[v]);
  return out;
}

Var Tape::push(double value) {
  const auto id = static_cast<std::int32_t>(values_.size());
  values_.push_back(value);
  const auto e = static_cast<std::uint32_t>(edges_.size());
  const auto p = static_cast<std::uint32_t>(pairs_.size());
  nodes_.push_back(Node{e, e, p, p});
  return Var(this, id, value);
}

void Tape::check_owner(const Var& v) const {
  if (!v.is_constant() && v.tape() != this) throw state_error("operand lives on another tape");
}

Var Tape::variable(double value) { return push(value); }

std::vector<Var> Tape::variables(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(push(v));
  return out;
}

void Tape::clear() {
  values_.clear();
  nodes_.clear();
  edges_.clear();
  pairs_.clear();
}

Var Tape::unary(double value, const Var& x, double dx) {
  check_owner(x);
  Var out = push(value);
  if (!x.is_constant() && dx != 0.0) {
    edges_.push_back({x.id(), dx});
    nodes_.back().edge_end = static_cast<std::uint32_t>(edges_.size());
  }
  return out;
}

Var Tape::binary(double value, const Var& a, double da, const Var& b, double db) {
  check_owner(a);
  check_owner(b);
  Var out = push(value);
  if (!a.is_constant() && da != 0.0) edges_.push_back({a.id(), da});
  if (!b.is_constant() && db != 0.0) edges_.push_back({b.id(), db});
  nodes_.back().edge_end = static_cast<std::uint32_t>(edges_.size());
  return out;
}

Var Tape::linear(double value, std::span<const Var> xs, std::span<const double> coeffs) {
  Var out = push(value);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_owner(xs[i]);
    if (!xs[i].is_constant() && coeffs[i] != 0.0) edges_.push_back({xs[i].id(), coeffs[i]});
  }
  nodes_.back().edge_end = static_cast<std::uint32_t>(edges_.size());
  return out;
}

Var Tape::dot(std::span<const Var> a, std::span<const Var> b, const Var& bias) {
  check_owner(bias);
  double value = bias.value();
  for (std::size_t i = 0; i < a.size(); ++i) value += a[i].value() * b[i].value();

  if (consecutive(a) && consecutive(b) && a[0].tape() == this && b[0].tape() == this) {
    Var out = push(value);
    Node& node = nodes_.back();
    node.block_a = a[0].id();
    node.block_b = b[0].id();
    node.block_len = static_cast<std::uint32_t>(a.size());
    if (!bias.is_constant()) {
      edges_.push_back({bias.id(), 1.0});
      node.edge_end = static_cast<std::uint32_t>(edges_.size());
    }
    return out;
  }

  Var out = push(value);
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_owner(a[i]);
    check_owner(b[i]);
    const bool ca = a[i].is_constant();
    const bool cb = b[i].is_constant();
    if (!ca && !cb) {
      pairs_.push_back({a[i].id(), b[i].id()});
    } else if (!ca) {
      if (b[i].value() != 0.0) edges_.push_back({a[i].id(), b[i].value()});
    } else if (!cb) {
      if (a[i].value() != 0.0) edges_.push_back({b[i].id(), a[i].value()});
    }
  }
  if (!bias.is_constant()) edges_.push_back({bias.id(), 1.0});
  Node& node = nodes_.back();
  node.edge_end = static_cast<std::uint32_t>(edges_.size());
  node.pair_end = static_cast<std::uint32_t>(pairs_.size());
  return out;
}

std::vector<Var> Tape::pack(std::span<const Var> xs) {
  if (consecutive(xs) && xs[0].tape() == this) return {xs.begin(), xs.end()};
  std::vector<Var> out;
  out.reserve(xs.size());
  for (const Var& x : xs) out.push_back(unary(x.value(), x, 1.0));
  return out;
}

Gradients Tape::backward(const Var& loss) {
  if (values_.empty()) throw state_error("backward called on an empty tape");
  if (loss.is_constant() || loss.tape() != this ||
      static_cast<std::size_t>(loss.id()) >= values_.size()) {
    throw state_error("loss is not a node of this tape");
  }
  adjoints_.assign(values_.size(), 0.0);
  adjoints_[static_cast<std::size_t>(loss.id())] = 1.0;
  double* adj = adjoints_.data();
  const double* val = values_.data();

  for (std::int64_t i = loss.id(); i >= 0; --i) {
    const double g = adj[i];
    if (g == 0.0) continue;
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    for (std::uint32_t e = node.edge_begin; e < node.edge_end; ++e) {
      adj[edges_[e].id] += edges_[e].partial * g;
    }
    for (std::uint32_t p = node.pair_begin; p < node.pair_end; ++p) {
      const Pair& pr = pairs_[p];
      adj[pr.a] += val[pr.b] * g;
      adj[pr.b] += val[pr.a] * g;
    }
    if (node.block_len > 0) {
      double* adj_a = adj + node.block_a;
      double* adj_b = adj + node.block_b;
      const double* val_a = val + node.block_a;
      const double* val_b = val + node.block_b;
      for (std::uint32_t k = 0; k < node.block_len; ++k) {
        adj_a[k] += val_b[k] * g;
        adj_b[k] += val_a[k] * g;
      }
    }
  }
  return Gradients(this, adjoints_);
}

Tape* common_tape(const Var& a, const Var& b) {
  if (a.is_constant()) return b.tape();
  if (b.is_constant() || a.tape() == b.tape()) return a.tape();
  throw state_error("operands live on different tapes");
}

Var operator+(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() + b.value();
  return t ? t->binary(v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() - b.value();
  return t ? t->binary(v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  const double v = a.value() * b.value();
  return t ? t->binary(v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) throw numeric_error("division by zero");
  Tape* t = common_tape(a, b);
  const double v = a.value() / b.value();
  return t ? t->binary(v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a) {
  return a.is_constant() ? Var(-a.value()) : a.tape()->unary(-a.value(), a, -1.0);
}

Var sin(const Var& x) {
  const double v = std::sin(x.value());
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, std::cos(x.value()));
}

Var cos(const Var& x) {
  const double v = std::cos(x.value());
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, -std::sin(x.value()));
}

Var exp(const Var& x) {
  const double v = std::exp(x.value());
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, v);
}

Var log(const Var& x) {
  if (!(x.value() > 0.0)) throw numeric_error("log of a non-positive value");
  const double v = std::log(x.value());
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, 1.0 / x.value());
}

Var sqrt(const Var& x) {
  if (x.value() < 0.0) throw numeric_error("sqrt of a negative value");
  const double v = std::sqrt(x.value());
  if (x.is_constant()) return Var(v);
  if (v == 0.0) throw numeric_error("sqrt derivative undefined at 0");
  return x.tape()->unary(v, x, 0.5 / v);
}

Var atan2(const Var& y, const Var& x) {
  const double r2 = x.value() * x.value() + y.value() * y.value();
  if (r2 == 0.0) throw numeric_error("atan2(0, 0) is undefined");
  const double v = std::atan2(y.value(), x.value());
  Tape* t = common_tape(y, x);
  return t ? t->binary(v, y, x.value() / r2, x, -y.value() / r2) : Var(v);
}

Var relu(const Var& x) {
  const bool on = x.value() > 0.0;
  const double v = on ? x.value() : 0.0;
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, on ? 1.0 : 0.0);
}

Var softplus(const Var& x) {
  const double v = softplus(x.value());
  if (x.is_constant()) return Var(v);
  const double sigmoid = 1.0 / (1.0 + std::exp(-x.value()));
  return x.tape()->unary(v, x, sigmoid);
}

Var square(const Var& x) {
  const double v = x.value() * x.value();
  return x.is_constant() ? Var(v) : x.tape()->unary(v, x, 2.0 * x.value());
}

Var sum(std::span<const Var> xs) {
  double v = 0.0;
  for (const Var& x : xs) v += x.value();
  Tape* t = first_tape(xs);
  if (t == nullptr) return Var(v);
  std::vector<double> ones(xs.size(), 1.0);
  return t->linear(v, xs, ones);
}

Var dot(std::span<const Var> a, std::span<const Var> b, const Var& bias) {
  if (a.size() != b.size()) throw shape_error("dot: operand lengths differ");
  Tape* t = first_tape(a);
  Tape* tb = first_tape(b);
  if (t == nullptr) t = tb;
  if (t == nullptr) t = bias.tape();
  if (t == nullptr) {
    double v = bias.value();
    for (std::size_t i = 0; i < a.size(); ++i) v += a[i].value() * b[i].value();
    return Var(v);
  }
  return t->dot(a, b, bias);
}

Var linear(std::span<const Var> xs, std::span<const double> coeffs) {
  if (xs.size() != coeffs.size()) throw shape_error("linear: operand lengths differ");
  double v = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) v += coeffs[i] * xs[i].value();
  Tape* t = first_tape(xs);
  return t ? t->linear(v, xs, coeffs) : Var(v);
}

std::vector<Var> pack(std::span<const Var> xs) {
  Tape* t = first_tape(xs);
  if (t == nullptr) return {xs.begin(), xs.end()};
  return t->pack(xs);
}

double sum(std::span<const double> xs) {
  double v = 0.0;
  for (double x : xs) v += x;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b, double bias) {
  if (a.size() != b.size()) throw shape_error("dot: operand lengths differ");
  double v = bias;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

double linear(std::span<const double> xs, std::span<const double> coeffs) {
  if (xs.size() != coeffs.size()) throw shape_error("linear: operand lengths differ");
  double v = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) v += coeffs[i] * xs[i];
  return v;
}

}  // namespace sdisc::ad
