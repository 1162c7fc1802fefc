#pragma once

#include "thermodiffuse/matrix.hpp"

namespace tdiff {

struct SvdResult {
  Matrix u;      // columns orthonormal
  Vector sigma;  // non-increasing, >= 0
  Matrix v;      // columns orthonormal
};

struct EigResult {
  Vector values;   // non-increasing
  Matrix vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
};

// One-sided Jacobi SVD. Deterministic: fixed cyclic sweep order, 100-sweep
// cap, relative off-diagonal threshold 1e-12. Sign convention: in each
// singular pair the left singular vector's largest-magnitude component is
// non-negative (ties broken by lowest index).
SvdResult svd(const Matrix& m);

// Cyclic Jacobi eigendecomposition for symmetric matrices. Input asymmetry
// above 1e-12 relative is a contract violation; below that the matrix is
// symmetrized internally.
EigResult sym_eig(const Matrix& m);

// Cholesky factor of a symmetric positive definite matrix, reusable across
// right-hand sides. No pivoting: a non-positive pivot throws
// NotPositiveDefinite with the pivot index.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& m);
  Vector solve(const Vector& b) const;
  const Matrix& lower() const { return l_; }

 private:
  Matrix l_;
};

Vector solve_spd(const Matrix& m, const Vector& b);

// a.b / (|a||b|), clamped to [-1, 1]; zero input throws DegenerateVector.
double cosine(const Vector& a, const Vector& b);

}  // namespace tdiff
