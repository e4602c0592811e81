#pragma once

// Skew-symmetric generators of one-parameter subgroups of SO(n), their
// canonical (Q, lambda) form, and the gauge freedom of that form.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace sdisc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSkewTolerance = 1e-12;
inline constexpr double kOrthogonalityTolerance = 1e-10;

// Throws dimension_error unless n is even and positive.
void require_even_dimension(Eigen::Index n);

// Element of so(n): an exactly skew-symmetric n x n matrix, n even.
class Generator {
 public:
  // Validates evenness and skew-symmetry (Frobenius norm of m + m^T within
  // tol), then stores the exact skew part (m - m^T) / 2.
  static Generator from_matrix(const Matrix& m, double tol = kSkewTolerance);
  static Generator zero(Eigen::Index n);

  Eigen::Index n() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }

 private:
  explicit Generator(Matrix m) : entries_(std::move(m)) {}
  Matrix entries_;
};

// B = Q (lambda_1 J (+) ... (+) lambda_r J) Q^T with Q in SO(n), r = n / 2.
struct CanonicalForm {
  Matrix q;
  Vector lambda;
  bool normalized = false;  // ||lambda||_2 == 1 at construction

  // Checks orthogonality, det(q) = +1, finite lambda, r = n / 2.
  static CanonicalForm make(Matrix q, Vector lambda);
};

// Planar rotation generator [[0, -1], [1, 0]].
Matrix planar_generator();
// R(alpha) = exp(alpha J).
Matrix planar_rotation(double alpha);
// (+)_k lambda_k J.
Matrix block_diagonal_generator(std::span<const double> lambda);

Generator assemble_generator(const CanonicalForm& cf);

// exp(t B) via scaling and squaring of the order-10 Taylor series.
Matrix matrix_exp(const Generator& b, double t);

// Special-orthogonal polar factor of raw: U V^T from the SVD, with the last
// column negated when the determinant is -1.
Matrix retract_orthogonal(const Matrix& raw);

struct CosineSimilarity {
  double value = 0.0;
  bool degenerate = false;  // both generators zero; value is 0 by convention
};

inline constexpr double kCosineEpsilon = 1e-12;

// <vec X, vec Y> / (||vec X|| ||vec Y|| + eps).
CosineSimilarity generator_cosine_similarity(const Generator& x, const Generator& y);

// Applies Q -> Q S P with S = (+)_k R(block_angles[k]) and P the 2-block
// permutation that places old block perm[k] at position k; lambda is permuted
// the same way.
CanonicalForm gauge_equivalent(const CanonicalForm& cf, std::span<const double> block_angles,
                               std::span<const int> perm);

// Free parameters of a skew matrix: the strict upper triangle, row-major.
Matrix skew_from_params(std::span<const double> params, Eigen::Index n);
std::vector<double> params_from_skew(const Matrix& a);

}  // namespace sdisc
