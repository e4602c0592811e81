#include "sdisc/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdisc/errors.hpp"

namespace sdisc {

namespace {

// Streams of the per-seed generator.
constexpr std::uint64_t kStreamGenerator = 11;
constexpr std::uint64_t kStreamTarget = 12;
constexpr std::uint64_t kStreamInputs = 13;
constexpr std::uint64_t kStreamNoise = 14;
constexpr std::uint64_t kStreamAudit = 15;

std::vector<double> standard_normal_inputs(std::size_t samples, int n, std::uint64_t seed) {
  auto rng = make_rng(seed, kStreamInputs);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(samples * static_cast<std::size_t>(n));
  for (double& v : x) v = gauss(rng);
  return x;
}

void audit_or_throw(const InvariantTarget& f, std::uint64_t seed) {
  const double worst = invariance_audit(f, kAuditPairs, seed);
  if (!(worst <= kAuditTolerance)) {
    throw std::logic_error("generated target failed its invariance audit (max deviation " +
                           std::to_string(worst) + ")");
  }
}

Dataset regression_from_target(const InvariantTarget& f, const std::string& task, std::size_t samples,
                               double noise_sigma, std::uint64_t seed) {
  if (samples == 0) throw argument_error("dataset needs at least one sample");
  const int n = static_cast<int>(f.cf.q.rows());
  Dataset ds;
  ds.n = n;
  ds.outputs = 1;
  ds.x = standard_normal_inputs(samples, n, seed);
  ds.y.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) ds.y[i] = f(ds.x_row(i));
  ds.meta.task = task;
  ds.meta.n = n;
  ds.meta.seed = seed;
  ds.meta.true_generator = assemble_generator(f.cf);
  ds.meta.true_lambda = std::vector<double>(f.cf.lambda.data(), f.cf.lambda.data() + f.cf.lambda.size());
  audit_or_throw(f, seed);
  return add_noise(std::move(ds), noise_sigma, seed);
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void Dataset::validate() const {
  if (n <= 0 || outputs <= 0) throw shape_error("dataset widths must be positive");
  if (x.empty() || x.size() % static_cast<std::size_t>(n) != 0) throw shape_error("dataset x is not N x n");
  if (y.size() != size() * static_cast<std::size_t>(outputs)) throw shape_error("dataset x and y row counts differ");
  if (meta.true_generator && meta.true_generator->n() != n) {
    throw dimension_error("true generator dimension differs from the input width");
  }
}

CanonicalForm make_random_generator(int n, std::uint64_t seed, GeneratorPreset preset) {
  require_even_dimension(n);
  const int r = n / 2;
  if (preset == GeneratorPreset::diagonal) {
    if (n != 4) throw dimension_error("the diagonal preset is defined for n = 4");
    Vector lambda(2);
    lambda << 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2;
    return CanonicalForm::make(Matrix::Identity(4, 4), lambda);
  }

  auto rng = make_rng(seed, kStreamGenerator);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = gauss(rng);
  const Matrix q = retract_orthogonal(raw);

  Vector lambda(r);
  if (r == 1) {
    lambda(0) = 1.0;
  } else if (std::bernoulli_distribution(0.5)(rng)) {
    // Integer entries in {+-1, +-2}: (l_2, -l_1, 0, ...) is then resonant and
    // lies inside bandwidth 2.
    std::uniform_int_distribution<int> magnitude(1, 2);
    std::bernoulli_distribution negative(0.5);
    for (int k = 0; k < r; ++k) lambda(k) = magnitude(rng) * (negative(rng) ? -1.0 : 1.0);
  } else {
    for (int k = 0; k < r; ++k) lambda(k) = gauss(rng);
  }
  lambda.normalize();
  return CanonicalForm::make(q, lambda);
}

double InvariantTarget::operator()(std::span<const double> x) const {
  const Eigen::Index n = cf.q.rows();
  if (x.size() != static_cast<std::size_t>(n)) throw shape_error("target input length differs from n");
  const Vector z = cf.q.transpose() * Eigen::Map<const Vector>(x.data(), n);
  const TorusPoint p = block_polar(std::span<const double>(z.data(), static_cast<std::size_t>(n)));
  const std::size_t r = p.radii.size();
  double y = 0.0;
  for (std::size_t k = 0; k < r; ++k) y += radial_weights[k] * p.radii[k] * p.radii[k];
  if (coupling != 0.0) {
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t l = k + 1; l < r; ++l)
        y += coupling * p.radii[k] * p.radii[l] * std::cos(p.angles[k] - p.angles[l]);
  }
  for (std::size_t j = 0; j < characters.size(); ++j) {
    double phase = phases[j];
    for (std::size_t k = 0; k < r; ++k) phase += characters[j][k] * p.angles[k];
    y += amplitudes[j] * std::cos(phase);
  }
  return y;
}

double invariance_audit(const InvariantTarget& f, int pairs, std::uint64_t seed) {
  const int n = static_cast<int>(f.cf.q.rows());
  const Generator b = assemble_generator(f.cf);
  auto rng = make_rng(seed, kStreamAudit);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  Vector x(n);
  for (int i = 0; i < pairs; ++i) {
    for (int k = 0; k < n; ++k) x(k) = gauss(rng);
    const double t = angle(rng);
    const Vector moved = matrix_exp(b, t) * x;
    const double a = f(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
    const double c = f(std::span<const double>(moved.data(), static_cast<std::size_t>(n)));
    worst = std::max(worst, std::abs(a - c));
  }
  return worst;
}

// Overall magnitude of synthetic targets relative to unit-variance inputs.
constexpr double kTargetScale = 0.25;

InvariantTarget make_invariant_target(const CanonicalForm& cf, int bandwidth, std::uint64_t seed) {
  const auto r = static_cast<int>(cf.lambda.size());
  auto rng = make_rng(seed, kStreamTarget);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  InvariantTarget f;
  f.cf = cf;
  // Evenly spaced radial weights keep the invariant planes well separated.
  for (int k = 0; k < r; ++k) f.radial_weights.push_back(kTargetScale * (r == 1 ? 0.5 : 0.25 + 0.75 * k / (r - 1)));
  std::shuffle(f.radial_weights.begin(), f.radial_weights.end(), rng);

  const auto candidates = primitive_set(bandwidth, r);
  const std::vector<double> lambda(cf.lambda.data(), cf.lambda.data() + r);
  std::vector<FrequencyVector> resonant = resonant_subset(lambda, candidates, 1e-9).members;
  std::shuffle(resonant.begin(), resonant.end(), rng);
  if (resonant.size() > 3) resonant.resize(3);
  std::sort(resonant.begin(), resonant.end());
  for (const FrequencyVector& m : resonant) {
    f.characters.push_back(m);
    f.amplitudes.push_back(kTargetScale * (0.5 + 0.5 * unit(rng)));
    f.phases.push_back(2.0 * std::numbers::pi * unit(rng));
  }
  return f;
}

Dataset synth_invariant_regression(const CanonicalForm& cf, std::size_t samples, double noise_sigma,
                                   std::uint64_t seed, int bandwidth) {
  const InvariantTarget f = make_invariant_target(cf, bandwidth, seed);
  Dataset ds = regression_from_target(f, "invariant_regression", samples, noise_sigma, seed);
  ds.meta.noise_sigma = noise_sigma;
  return ds;
}

Dataset synth_invariant_classification(const CanonicalForm& cf, std::size_t samples, double noise_sigma,
                                       std::uint64_t seed, int bandwidth) {
  Dataset ds = synth_invariant_regression(cf, samples, 0.0, seed, bandwidth);
  std::vector<double> sorted = ds.y;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const Dataset noisy = add_noise(ds, noise_sigma, seed);
  for (std::size_t i = 0; i < ds.y.size(); ++i) ds.y[i] = noisy.y[i] > median ? 1.0 : 0.0;
  ds.meta.task = "invariant_classification";
  ds.meta.target = TargetKind::binary;
  ds.meta.noise_sigma = noise_sigma;
  return ds;
}

InvariantTarget pendulum_target() {
  InvariantTarget f;
  Vector lambda = Vector::Constant(3, 1.0 / std::sqrt(3.0));
  f.cf = CanonicalForm::make(Matrix::Identity(6, 6), lambda);
  // Spring energy 1/2 sum r_k^2 with coupling 1/2 sum r_k r_l cos(theta_k - theta_l),
  // plus the angle-only pendulum potential sum cos(theta_k - theta_l). The
  // angle-only part rules out the larger torus that leaves every quadratic
  // form invariant.
  f.radial_weights = {0.5, 0.5, 0.5};
  f.coupling = 0.5;
  f.characters = {FrequencyVector({0, 1, -1}), FrequencyVector({1, -1, 0}), FrequencyVector({1, 0, -1})};
  f.amplitudes = {1.0, 1.0, 1.0};
  f.phases = {0.0, 0.0, 0.0};
  return f;
}

Dataset double_pendulum_task(std::size_t samples, double noise_sigma, std::uint64_t seed) {
  Dataset ds = regression_from_target(pendulum_target(), "pendulum6d", samples, noise_sigma, seed);
  ds.meta.noise_sigma = noise_sigma;
  return ds;
}

Dataset add_noise(Dataset ds, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw argument_error("noise sigma must be nonnegative");
  if (sigma == 0.0) return ds;
  auto rng = make_rng(seed, kStreamNoise);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double& v : ds.y) v += gauss(rng);
  ds.meta.noise_sigma = std::hypot(ds.meta.noise_sigma, sigma);
  return ds;
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"pendulum6d", "rotated4d", "diagonal4d", "random", "classify4d"};
  return names;
}

Dataset make_task(const std::string& task, int n, std::size_t samples, double noise_sigma, std::uint64_t seed,
                  int bandwidth) {
  Dataset ds;
  if (task == "pendulum6d") {
    ds = double_pendulum_task(samples, noise_sigma, seed);
  } else if (task == "rotated4d" || task == "classify4d") {
    CanonicalForm cf = make_random_generator(4, seed);
    cf.lambda = Vector(2);
    cf.lambda << 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2;
    cf.normalized = true;
    ds = task == "rotated4d" ? synth_invariant_regression(cf, samples, noise_sigma, seed, bandwidth)
                             : synth_invariant_classification(cf, samples, noise_sigma, seed, bandwidth);
  } else if (task == "diagonal4d") {
    ds = synth_invariant_regression(make_random_generator(4, seed, GeneratorPreset::diagonal), samples,
                                    noise_sigma, seed, bandwidth);
  } else if (task == "random") {
    ds = synth_invariant_regression(make_random_generator(n, seed), samples, noise_sigma, seed, bandwidth);
  } else {
    throw argument_error("unknown task '" + task + "'");
  }
  ds.meta.task = task;
  return ds;
}

}  // namespace sdisc
