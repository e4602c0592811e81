#pragma once

// Scaling-and-squaring matrix exponential written over the scalar type, so the
// same code runs on plain doubles and on the autodiff tape.

#include <cmath>
#include <span>
#include <vector>

#include "sdisc/autodiff.hpp"

namespace sdisc {

inline constexpr int kExpTaylorOrder = 10;

// Smallest s >= 0 with norm / 2^s <= 0.5.
inline int exp_squarings(double norm) {
  int s = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++s;
  }
  return s;
}

// Row-major n x n product.
template <class T>
std::vector<T> matmul(std::span<const T> a, std::span<const T> b, int n) {
  std::vector<T> out(static_cast<std::size_t>(n) * n);
  std::vector<T> col(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) col[k] = b[static_cast<std::size_t>(k) * n + j];
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i) * n + j] =
          ad::dot(a.subspan(static_cast<std::size_t>(i) * n, n), std::span<const T>(col));
    }
  }
  return out;
}

// exp(t * a) for a row-major n x n matrix a. The squaring count is chosen from
// the primal Frobenius norm of t * a.
template <class T>
std::vector<T> expm(std::span<const T> a, int n, double t) {
  const std::size_t size = static_cast<std::size_t>(n) * n;
  double norm2 = 0.0;
  for (const T& v : a) norm2 += ad::value_of(v) * ad::value_of(v);
  const int squarings = exp_squarings(std::abs(t) * std::sqrt(norm2));
  const double scale = t / std::ldexp(1.0, squarings);

  std::vector<T> scaled(size);
  for (std::size_t i = 0; i < size; ++i) scaled[i] = a[i] * scale;

  // Horner form of the truncated series: I + A(I + A/2(I + ... (I + A/10))).
  std::vector<T> p(size, T(0.0));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i) * n + i] = T(1.0);
  for (int k = kExpTaylorOrder; k >= 1; --k) {
    std::vector<T> ap = matmul<T>(scaled, p, n);
    for (std::size_t i = 0; i < size; ++i) ap[i] = ap[i] * (1.0 / k);
    for (int i = 0; i < n; ++i) ap[static_cast<std::size_t>(i) * n + i] += 1.0;
    p = std::move(ap);
  }
  for (int s = 0; s < squarings; ++s) p = matmul<T>(p, p, n);
  return p;
}

}  // namespace sdisc
