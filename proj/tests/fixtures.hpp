#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sdisc/autodiff.hpp"
#include "sdisc/data.hpp"
#include "sdisc/model.hpp"
#include "sdisc/train.hpp"

namespace fixture {

// Every parameter drawn N(0, scale^2), biases included, so ReLU kinks are hit
// with probability zero.
inline sdisc::GeneratorParams random_params(const sdisc::ModelShape& shape, std::uint64_t seed, double scale = 0.5) {
  sdisc::GeneratorParams p = sdisc::zero_params(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> flat = p.flatten();
  for (double& v : flat) v = g(rng);
  p.assign(flat);
  return p;
}

inline sdisc::Dataset random_dataset(int n, int outputs, std::size_t rows, std::uint64_t seed) {
  sdisc::Dataset ds;
  ds.n = n;
  ds.outputs = outputs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < rows * static_cast<std::size_t>(n); ++i) ds.x.push_back(g(rng));
  for (std::size_t i = 0; i < rows * static_cast<std::size_t>(outputs); ++i) ds.y.push_back(g(rng));
  ds.meta.n = n;
  return ds;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Reverse-mode gradient of the minibatch objective against central
// differences with step 1e-6 * max(1, |p|).
inline GradientCheck check_objective_gradient(const sdisc::GeneratorParams& params,
                                              std::span<const sdisc::FrequencyVector> freqs,
                                              const sdisc::Dataset& ds, double mu, sdisc::LossKind loss) {
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const std::vector<double> flat = params.flatten();

  sdisc::ad::Tape tape;
  const auto leaves = tape.variables(flat);
  const auto objective = sdisc::batch_objective<sdisc::ad::Var>(params, leaves, freqs, ds, rows, mu, loss);
  const std::vector<double> grads = tape.backward(objective).of(leaves);

  auto eval = [&](const std::vector<double>& p) {
    return sdisc::batch_objective<double>(params, std::span<const double>(p), freqs, ds, rows, mu, loss);
  };
  GradientCheck out;
  out.parameters = flat.size();
  std::vector<double> probe = flat;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(flat[i]));
    probe[i] = flat[i] + h;
    const double up = eval(probe);
    probe[i] = flat[i] - h;
    const double down = eval(probe);
    probe[i] = flat[i];
    const double fd = (up - down) / (2.0 * h);
    const double rel = std::abs(grads[i] - fd) / std::max({1.0, std::abs(grads[i]), std::abs(fd)});
    out.max_rel_error = std::max(out.max_rel_error, rel);
  }
  return out;
}

}  // namespace fixture
