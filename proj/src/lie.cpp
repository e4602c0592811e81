#include "sdisc/lie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdisc/errors.hpp"
#include "sdisc/expm.hpp"

namespace sdisc {

void require_even_dimension(Eigen::Index n) {
  if (n <= 0 || n % 2 != 0) {
    throw dimension_error("ambient dimension must be even and positive, got " + std::to_string(n));
  }
}

Generator Generator::from_matrix(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw shape_error("generator must be square");
  require_even_dimension(m.rows());
  if (!m.allFinite()) throw numeric_error("generator has non-finite entries");
  if ((m + m.transpose()).norm() > tol) throw argument_error("matrix is not skew-symmetric");
  Matrix skew = 0.5 * (m - m.transpose());
  return Generator(std::move(skew));
}

Generator Generator::zero(Eigen::Index n) {
  require_even_dimension(n);
  return Generator(Matrix::Zero(n, n));
}

CanonicalForm CanonicalForm::make(Matrix q, Vector lambda) {
  if (q.rows() != q.cols()) throw shape_error("alignment matrix must be square");
  require_even_dimension(q.rows());
  if (lambda.size() != q.rows() / 2) throw dimension_error("lambda must have length n / 2");
  if (!q.allFinite() || !lambda.allFinite()) throw numeric_error("canonical form has non-finite entries");
  const Eigen::Index n = q.rows();
  if ((q.transpose() * q - Matrix::Identity(n, n)).norm() > kOrthogonalityTolerance) {
    throw argument_error("alignment matrix is not orthogonal");
  }
  if (std::abs(q.determinant() - 1.0) > kOrthogonalityTolerance) {
    throw argument_error("alignment matrix must have determinant +1");
  }
  CanonicalForm cf;
  cf.normalized = std::abs(lambda.norm() - 1.0) <= 1e-12;
  cf.q = std::move(q);
  cf.lambda = std::move(lambda);
  return cf;
}

Matrix planar_generator() {
  Matrix j(2, 2);
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

Matrix planar_rotation(double alpha) {
  Matrix r(2, 2);
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  r << c, -s, s, c;
  return r;
}

Matrix block_diagonal_generator(std::span<const double> lambda) {
  const auto r = static_cast<Eigen::Index>(lambda.size());
  Matrix d = Matrix::Zero(2 * r, 2 * r);
  for (Eigen::Index k = 0; k < r; ++k) {
    d(2 * k + 1, 2 * k) = lambda[static_cast<std::size_t>(k)];
    d(2 * k, 2 * k + 1) = -lambda[static_cast<std::size_t>(k)];
  }
  return d;
}

Generator assemble_generator(const CanonicalForm& cf) {
  require_even_dimension(cf.q.rows());
  if (cf.lambda.size() != cf.q.rows() / 2) throw dimension_error("lambda must have length n / 2");
  const Matrix d = block_diagonal_generator({cf.lambda.data(), static_cast<std::size_t>(cf.lambda.size())});
  const Matrix b = cf.q * d * cf.q.transpose();
  // Antisymmetrize so the stored matrix is skew to the last bit.
  return Generator::from_matrix(0.5 * (b - b.transpose()), std::numeric_limits<double>::infinity());
}

Matrix matrix_exp(const Generator& b, double t) {
  const Matrix& m = b.entries();
  if (!m.allFinite() || !std::isfinite(t)) throw numeric_error("matrix_exp: non-finite input");
  const auto n = static_cast<int>(m.rows());
  // Row-major copy for the generic kernel.
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
  const std::vector<double> e = expm<double>(a, n, t);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = e[static_cast<std::size_t>(i) * n + j];
  return out;
}

Matrix retract_orthogonal(const Matrix& raw) {
  if (raw.rows() != raw.cols()) throw shape_error("retract_orthogonal: matrix must be square");
  if (!raw.allFinite()) throw numeric_error("retract_orthogonal: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double tol = std::max<double>(1.0, sigma(0)) * static_cast<double>(raw.rows()) *
                     std::numeric_limits<double>::epsilon() * 16.0;
  if (sigma.size() == 0 || sigma(sigma.size() - 1) <= tol) {
    throw singularity_error("retract_orthogonal: input is rank deficient");
  }
  Matrix q = svd.matrixU() * svd.matrixV().transpose();
  if (q.determinant() < 0.0) q.col(q.cols() - 1) *= -1.0;
  return q;
}

CosineSimilarity generator_cosine_similarity(const Generator& x, const Generator& y) {
  if (x.n() != y.n()) throw shape_error("cosine similarity: generator dimensions differ");
  const double nx = x.entries().norm();
  const double ny = y.entries().norm();
  if (nx == 0.0 && ny == 0.0) return {0.0, true};
  const double inner = x.entries().cwiseProduct(y.entries()).sum();
  return {std::clamp(inner / (nx * ny + kCosineEpsilon), -1.0, 1.0), false};
}

CanonicalForm gauge_equivalent(const CanonicalForm& cf, std::span<const double> block_angles,
                               std::span<const int> perm) {
  const Eigen::Index n = cf.q.rows();
  require_even_dimension(n);
  const auto r = static_cast<std::size_t>(n / 2);
  if (block_angles.size() != r) throw dimension_error("gauge: need one angle per block");
  if (perm.size() != r) throw argument_error("gauge: permutation has the wrong length");
  std::vector<bool> seen(r, false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= r || seen[static_cast<std::size_t>(p)]) {
      throw argument_error("gauge: not a permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }

  Matrix qs = cf.q;
  for (std::size_t k = 0; k < r; ++k) {
    const auto c = static_cast<Eigen::Index>(2 * k);
    qs.middleCols(c, 2) = cf.q.middleCols(c, 2) * planar_rotation(block_angles[k]);
  }
  CanonicalForm out;
  out.q.resize(n, n);
  out.lambda.resize(static_cast<Eigen::Index>(r));
  for (std::size_t k = 0; k < r; ++k) {
    const auto src = static_cast<Eigen::Index>(perm[k]);
    out.q.middleCols(static_cast<Eigen::Index>(2 * k), 2) = qs.middleCols(2 * src, 2);
    out.lambda(static_cast<Eigen::Index>(k)) = cf.lambda(src);
  }
  out.normalized = cf.normalized;
  return out;
}

Matrix skew_from_params(std::span<const double> params, Eigen::Index n) {
  if (params.size() != static_cast<std::size_t>(n * (n - 1) / 2)) {
    throw shape_error("skew parameters must have length n(n-1)/2");
  }
  Matrix a = Matrix::Zero(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      a(i, j) = params[k];
      a(j, i) = -params[k];
      ++k;
    }
  }
  return a;
}

std::vector<double> params_from_skew(const Matrix& a) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) out.push_back(a(i, j));
  return out;
}

}  // namespace sdisc
