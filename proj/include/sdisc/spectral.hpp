#pragma once

// Maximal-torus side of the method: polar coordinates of aligned 2-blocks,
// the primitive frequency lattice, torus characters, resonant sets and the
// recovery of rotation rates from surviving frequencies.

#include <complex>
#include <map>
#include <span>
#include <vector>

#include "sdisc/lie.hpp"

namespace sdisc {

// Integer frequency vector m in Z^r indexing the character exp(i <m, theta>).
class FrequencyVector {
 public:
  FrequencyVector() = default;
  explicit FrequencyVector(std::vector<int> m);
  // Throws argument_error when an entry exceeds the bandwidth.
  static FrequencyVector bounded(std::vector<int> m, int bandwidth);

  const std::vector<int>& entries() const noexcept { return m_; }
  std::size_t size() const noexcept { return m_.size(); }
  int operator[](std::size_t k) const { return m_[k]; }
  // gcd of |entries| is 1 and the first nonzero entry is positive.
  bool primitive() const noexcept { return primitive_; }
  bool is_zero() const noexcept;
  double norm() const;

  friend bool operator==(const FrequencyVector& a, const FrequencyVector& b) { return a.m_ == b.m_; }
  friend bool operator<(const FrequencyVector& a, const FrequencyVector& b) { return a.m_ < b.m_; }

 private:
  std::vector<int> m_;
  bool primitive_ = false;
};

struct TorusPoint {
  std::vector<double> radii;
  std::vector<double> angles;  // in [0, 2 pi); 0 where the radius is 0
};

// Splits z into n/2 planar blocks and returns their polar coordinates.
TorusPoint block_polar(std::span<const double> z);

// m / gcd(|m_1|, ..., |m_r|), negated if needed so the first nonzero entry is
// positive.
FrequencyVector primitive(std::span<const int> m);

// All distinct primitive directions of nonzero m in {-B..B}^r, in
// lexicographic order.
std::vector<FrequencyVector> primitive_set(int bandwidth, int r);

// exp(i <m, theta>).
std::complex<double> character(const FrequencyVector& m, const TorusPoint& p);

double inner(const FrequencyVector& m, std::span<const double> lambda);

struct ResonantSet {
  std::vector<double> lambda;
  std::vector<FrequencyVector> members;
  double tol = 0.0;
};

// Members satisfy |<m, lambda>| <= tol ||m|| ||lambda||.
ResonantSet resonant_subset(std::span<const double> lambda, std::span<const FrequencyVector> candidates,
                            double tol);

inline constexpr double kNullityRelativeCutoff = 1e-8;

struct LambdaEstimate {
  Vector lambda;                  // unit norm, first nonzero component positive
  int nullity = 0;                // dim ker(M)
  std::vector<double> singular_values;

  // Unique up to sign exactly when the kernel is one-dimensional.
  bool unique() const noexcept { return nullity == 1; }
  // A nonzero solution of M lambda = 0 exists.
  bool reliable() const noexcept { return nullity >= 1; }
};

// Right-singular vector of the stacked constraint matrix M (rows m^T) for the
// smallest singular value.
LambdaEstimate estimate_lambda(std::span<const FrequencyVector> surviving, int r);

// Frequencies whose coefficient is at least rel_threshold * max coefficient.
std::vector<FrequencyVector> surviving_frequencies(const std::map<FrequencyVector, double>& coeffs,
                                                   double rel_threshold);

}  // namespace sdisc
