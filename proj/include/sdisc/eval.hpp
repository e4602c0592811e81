#pragma once

// Held-out metrics: test MSE / accuracy, Monte-Carlo invariance error, and
// generator recovery.

#include <cstdint>
#include <optional>
#include <functional>
#include <span>
#include <vector>

#include "sdisc/data.hpp"
#include "sdisc/lie.hpp"
#include "sdisc/model.hpp"

namespace sdisc {

// Mean over samples and output dimensions of the squared error.
double test_mse(const Predictor& f, const Dataset& ds, std::span<const std::size_t> rows);
// Fraction of rows where 1[f(x) > 0] equals the 0/1 label.
double test_accuracy(const Predictor& f, const Dataset& ds, std::span<const std::size_t> rows);

// Mean over all (x, t) pairs of ||f(x) - f(exp(t B) x)||^2.
double invariance_error(const Predictor& f, std::span<const std::vector<double>> xs, const Generator& true_b,
                        std::span<const double> t_samples);
using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;
double invariance_error(const VectorFunction& f, std::span<const std::vector<double>> xs, const Generator& true_b,
                        std::span<const double> t_samples);

struct InvarianceBudget {
  int x_samples = 256;
  int t_samples = 16;
  double t_range = 3.141592653589793;  // t ~ U[-t_range, t_range]
};

// Draws the t grid deterministically from seed.
std::vector<double> sample_t(const InvarianceBudget& budget, std::uint64_t seed);

}  // namespace sdisc
