#include "sdisc/eval.hpp"

#include "sdisc/errors.hpp"

namespace sdisc {

double test_mse(const Predictor& f, const Dataset& ds, std::span<const std::size_t> rows) {
  if (rows.empty()) throw argument_error("test_mse: empty evaluation set");
  double total = 0.0;
  for (std::size_t i : rows) {
    const std::vector<double> out = f(ds.x_row(i));
    const auto y = ds.y_row(i);
    if (out.size() != y.size()) throw shape_error("prediction width differs from target width");
    for (std::size_t k = 0; k < y.size(); ++k) total += (out[k] - y[k]) * (out[k] - y[k]);
  }
  return total / static_cast<double>(rows.size() * static_cast<std::size_t>(ds.outputs));
}

double test_accuracy(const Predictor& f, const Dataset& ds, std::span<const std::size_t> rows) {
  if (rows.empty()) throw argument_error("test_accuracy: empty evaluation set");
  std::size_t hits = 0;
  for (std::size_t i : rows) {
    const bool predicted = f(ds.x_row(i)).front() > 0.0;
    const bool label = ds.y_row(i).front() > 0.5;
    hits += predicted == label ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double invariance_error(const Predictor& f, std::span<const std::vector<double>> xs, const Generator& true_b,
                        std::span<const double> t_samples) {
  return invariance_error(VectorFunction([&f](std::span<const double> x) { return f(x); }), xs, true_b, t_samples);
}

double invariance_error(const VectorFunction& f, std::span<const std::vector<double>> xs, const Generator& true_b,
                        std::span<const double> t_samples) {
  if (xs.empty() || t_samples.empty()) throw argument_error("invariance_error: no samples");
  const Eigen::Index n = true_b.n();
  std::vector<Matrix> rotations;
  rotations.reserve(t_samples.size());
  for (double t : t_samples) rotations.push_back(matrix_exp(true_b, t));

  double total = 0.0;
  std::vector<double> moved(static_cast<std::size_t>(n));
  for (const auto& x : xs) {
    if (x.size() != static_cast<std::size_t>(n)) throw shape_error("invariance_error: input width differs from n");
    const std::vector<double> base = f(x);
    const Eigen::Map<const Vector> xv(x.data(), n);
    for (const Matrix& rot : rotations) {
      Eigen::Map<Vector>(moved.data(), n) = rot * xv;
      const std::vector<double> out = f(moved);
      for (std::size_t k = 0; k < out.size(); ++k) total += (base[k] - out[k]) * (base[k] - out[k]);
    }
  }
  return total / static_cast<double>(xs.size() * t_samples.size());
}

std::vector<double> sample_t(const InvarianceBudget& budget, std::uint64_t seed) {
  auto rng = make_rng(seed, 21);
  std::uniform_real_distribution<double> dist(-budget.t_range, budget.t_range);
  std::vector<double> t(static_cast<std::size_t>(budget.t_samples));
  for (double& v : t) v = dist(rng);
  return t;
}

}  // namespace sdisc
