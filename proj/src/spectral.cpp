#include "sdisc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <set>

#include "sdisc/errors.hpp"

namespace sdisc {

namespace {

bool is_sign_canonical_primitive(const std::vector<int>& m) {
  int g = 0;
  for (int v : m) g = std::gcd(g, std::abs(v));
  if (g != 1) return false;
  const auto first = std::find_if(m.begin(), m.end(), [](int v) { return v != 0; });
  return first != m.end() && *first > 0;
}

}  // namespace

FrequencyVector::FrequencyVector(std::vector<int> m)
    : m_(std::move(m)), primitive_(is_sign_canonical_primitive(m_)) {}

FrequencyVector FrequencyVector::bounded(std::vector<int> m, int bandwidth) {
  for (int v : m) {
    if (std::abs(v) > bandwidth) throw argument_error("frequency entry exceeds the bandwidth");
  }
  return FrequencyVector(std::move(m));
}

bool FrequencyVector::is_zero() const noexcept {
  return std::all_of(m_.begin(), m_.end(), [](int v) { return v == 0; });
}

double FrequencyVector::norm() const {
  double s = 0.0;
  for (int v : m_) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

TorusPoint block_polar(std::span<const double> z) {
  require_even_dimension(static_cast<Eigen::Index>(z.size()));
  const std::size_t r = z.size() / 2;
  TorusPoint p;
  p.radii.resize(r);
  p.angles.resize(r);
  for (std::size_t k = 0; k < r; ++k) {
    const double a = z[2 * k];
    const double b = z[2 * k + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) throw numeric_error("block_polar: non-finite input");
    p.radii[k] = std::hypot(a, b);
    if (p.radii[k] == 0.0) {
      p.angles[k] = 0.0;
      continue;
    }
    double theta = std::atan2(b, a);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
    p.angles[k] = theta;
  }
  return p;
}

FrequencyVector primitive(std::span<const int> m) {
  int g = 0;
  for (int v : m) g = std::gcd(g, std::abs(v));
  if (g == 0) throw argument_error("primitive: zero frequency vector has no direction");
  std::vector<int> out(m.begin(), m.end());
  const auto first = std::find_if(out.begin(), out.end(), [](int v) { return v != 0; });
  const int sign = *first > 0 ? 1 : -1;
  for (int& v : out) v = sign * (v / g);
  return FrequencyVector(std::move(out));
}

std::vector<FrequencyVector> primitive_set(int bandwidth, int r) {
  if (bandwidth < 1 || r < 1) throw argument_error("primitive_set: bandwidth and r must be >= 1");
  std::set<FrequencyVector> found;
  std::vector<int> m(static_cast<std::size_t>(r), -bandwidth);
  // Odometer over {-B..B}^r.
  while (true) {
    if (std::any_of(m.begin(), m.end(), [](int v) { return v != 0; })) found.insert(primitive(m));
    std::size_t k = 0;
    while (k < m.size() && m[k] == bandwidth) m[k++] = -bandwidth;
    if (k == m.size()) break;
    ++m[k];
  }
  return {found.begin(), found.end()};
}

std::complex<double> character(const FrequencyVector& m, const TorusPoint& p) {
  if (m.size() != p.angles.size()) throw dimension_error("character: frequency and torus rank differ");
  double phase = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) phase += m[k] * p.angles[k];
  return {std::cos(phase), std::sin(phase)};
}

double inner(const FrequencyVector& m, std::span<const double> lambda) {
  if (m.size() != lambda.size()) throw dimension_error("frequency and lambda lengths differ");
  double s = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) s += m[k] * lambda[k];
  return s;
}

ResonantSet resonant_subset(std::span<const double> lambda, std::span<const FrequencyVector> candidates,
                            double tol) {
  if (tol < 0.0) throw argument_error("resonant_subset: tolerance must be nonnegative");
  double lambda_norm = 0.0;
  for (double v : lambda) lambda_norm += v * v;
  lambda_norm = std::sqrt(lambda_norm);
  ResonantSet out;
  out.lambda.assign(lambda.begin(), lambda.end());
  out.tol = tol;
  for (const FrequencyVector& m : candidates) {
    if (std::abs(inner(m, lambda)) <= tol * m.norm() * lambda_norm) out.members.push_back(m);
  }
  return out;
}

LambdaEstimate estimate_lambda(std::span<const FrequencyVector> surviving, int r) {
  if (r < 1) throw argument_error("estimate_lambda: r must be >= 1");
  LambdaEstimate est;
  if (surviving.empty()) {
    est.lambda = Vector::Unit(r, 0);
    est.nullity = r;
    return est;
  }
  Matrix m(static_cast<Eigen::Index>(surviving.size()), r);
  for (std::size_t i = 0; i < surviving.size(); ++i) {
    if (surviving[i].size() != static_cast<std::size_t>(r)) {
      throw dimension_error("estimate_lambda: frequency length differs from r");
    }
    for (int k = 0; k < r; ++k) m(static_cast<Eigen::Index>(i), k) = surviving[i][static_cast<std::size_t>(k)];
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  est.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
  // Rows < r leaves r - rows implicit zero singular values.
  est.singular_values.resize(static_cast<std::size_t>(r), 0.0);
  const double cutoff = kNullityRelativeCutoff * est.singular_values.front();
  est.nullity = static_cast<int>(std::count_if(est.singular_values.begin(), est.singular_values.end(),
                                               [cutoff](double s) { return s <= cutoff; }));
  Vector v = svd.matrixV().col(r - 1);
  v.normalize();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      if (v(k) < 0.0) v = -v;
      break;
    }
  }
  est.lambda = v;
  return est;
}

std::vector<FrequencyVector> surviving_frequencies(const std::map<FrequencyVector, double>& coeffs,
                                                   double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
    throw argument_error("surviving_frequencies: threshold must lie in (0, 1)");
  }
  double peak = 0.0;
  for (const auto& [m, c] : coeffs) peak = std::max(peak, c);
  std::vector<FrequencyVector> out;
  if (peak <= 0.0) return out;
  for (const auto& [m, c] : coeffs) {
    if (c >= rel_threshold * peak) out.push_back(m);
  }
  return out;
}

}  // namespace sdisc
