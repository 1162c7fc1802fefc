#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"

using namespace tdiff;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

Matrix random_spd(std::size_t n, std::uint64_t seed) {
  const Matrix g = random_matrix(n, n, seed);
  Matrix m = g.transposed() * g;
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.5;
  return m;
}

// independent oracle: Gaussian elimination with partial pivoting
Vector gauss_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  }
  return m;
}

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i) {
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= s.sigma[j];
  }
  return us * s.v.transposed();
}

void check_orthonormal_columns(const Matrix& m, double tol) {
  for (std::size_t a = 0; a < m.cols(); ++a) {
    for (std::size_t b = a; b < m.cols(); ++b) {
      const double d = dot(m.col(a), m.col(b));
      CHECK(std::abs(d - (a == b ? 1.0 : 0.0)) < tol);
    }
  }
}

}  // namespace

TEST_CASE("svd of hand-solved 2x2 examples") {
  {
    const Matrix m(2, 2, Vector{0, 2, 1, 0});
    const SvdResult s = svd(m);
    CHECK(s.sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    const Matrix m(2, 2, Vector{3, 0, 0, 2});
    const SvdResult s = svd(m);
    CHECK(s.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(s.u(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(s.v(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("svd reconstruction on 200 random matrices") {
  for (std::uint64_t t = 0; t < 200; ++t) {
    const std::size_t rows = 2 + t % 11;
    const std::size_t cols = 2 + (t / 2) % rows;  // cols <= rows
    const Matrix m = random_matrix(rows, cols, 100 + t);
    const SvdResult s = svd(m);
    const double scale = std::max(1.0, m.frobenius_norm());
    CHECK(max_abs_diff(reconstruct(s), m) / scale < 1e-10);
    check_orthonormal_columns(s.u, 1e-10);
    check_orthonormal_columns(s.v, 1e-10);
    for (std::size_t j = 0; j + 1 < s.sigma.size(); ++j) CHECK(s.sigma[j] >= s.sigma[j + 1]);
    CHECK(s.sigma.back() >= 0.0);
  }
}

TEST_CASE("svd of a rank-deficient matrix") {
  Matrix m(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    m(i, 0) = static_cast<double>(i + 1);
    m(i, 1) = 2.0 * static_cast<double>(i + 1);
    m(i, 2) = -1.0;
  }
  const SvdResult s = svd(m);
  CHECK(s.sigma[2] < 1e-10);
  CHECK(max_abs_diff(reconstruct(s), m) < 1e-10);
}

TEST_CASE("sym_eig on hand-solved matrices") {
  {
    const Matrix m(2, 2, Vector{2, 1, 1, 2});
    const EigResult e = sym_eig(m);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(e.vectors(0, 0) * e.vectors(1, 0)) ==
          doctest::Approx(inv_sqrt2 * inv_sqrt2).epsilon(1e-10));
    CHECK(e.vectors(0, 0) * e.vectors(1, 0) > 0.0);   // (1,1) direction
    CHECK(e.vectors(0, 1) * e.vectors(1, 1) < 0.0);   // (1,-1) direction
  }
  {
    const EigResult e = sym_eig(Matrix::identity(4));
    for (double v : e.values) CHECK(v == doctest::Approx(1.0));
    check_orthonormal_columns(e.vectors, 1e-12);
  }
}

TEST_CASE("sym_eig reconstructs random symmetric matrices") {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const std::size_t n = 2 + t % 9;
    const Matrix g = random_matrix(n, n, 300 + t);
    const Matrix m = 0.5 * (g + g.transposed());
    const EigResult e = sym_eig(m);
    Matrix qs = e.vectors;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) qs(i, j) *= e.values[j];
    }
    CHECK(max_abs_diff(qs * e.vectors.transposed(), m) < 1e-9);
    check_orthonormal_columns(e.vectors, 1e-10);
  }
}

TEST_CASE("sym_eig converges on rank-deficient and steeply graded spectra") {
  {
    // rank-1: u u^T scaled, most diagonal entries near zero
    Rng rng(77);
    const std::size_t n = 64;
    Vector u(n);
    for (double& v : u) v = rng.next_normal();
    const double nu = norm(u);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(i, j) = 0.034 * (u[i] / nu) * (u[j] / nu);
    }
    const EigResult e = sym_eig(m);
    CHECK(e.values[0] == doctest::Approx(0.034).epsilon(1e-9));
    CHECK(std::abs(e.values[1]) < 1e-10);
  }
  {
    // eigenvalues spanning 8 decades
    const std::size_t n = 16;
    const Matrix q = svd(random_matrix(n, n, 78)).u;
    Matrix scaled = q;
    for (std::size_t i = 0; i < n; ++i) {
      const double lam = std::pow(10.0, -8.0 * static_cast<double>(i) / (n - 1));
      for (std::size_t r = 0; r < n; ++r) scaled(r, i) *= lam;
    }
    const Matrix m = scaled * q.transposed();
    const EigResult e = sym_eig(0.5 * (m + m.transposed()));
    CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(e.values[n - 1] == doctest::Approx(1e-8).epsilon(1e-3));
  }
}

TEST_CASE("sym_eig rejects non-square and asymmetric input") {
  CHECK_THROWS_AS(sym_eig(Matrix(2, 3)), ContractViolation);
  Matrix m(2, 2, Vector{1.0, 2.0, 0.5, 1.0});
  CHECK_THROWS_AS(sym_eig(m), ContractViolation);
}

TEST_CASE("cholesky factor of a hand example") {
  // m = L L^T with L = [[2,0],[1,3]]
  const Matrix m(2, 2, Vector{4, 2, 2, 10});
  const CholeskyFactor f(m);
  CHECK(f.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower()(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower()(1, 1) == doctest::Approx(3.0));
  // inverse is (1/36) [[10,-2],[-2,4]], so x = (17/18, 10/9)
  const Vector x = f.solve(Vector{6.0, 13.0});
  CHECK(x[0] == doctest::Approx(17.0 / 18.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cholesky reports the failing pivot") {
  Matrix m(3, 3, Vector{1, 0, 0, 0, -1, 0, 0, 0, 1});
  try {
    CholeskyFactor f(m);
    CHECK(false);
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot_index == 1);
  }
}

TEST_CASE("solve_spd against gaussian elimination on random systems") {
  for (std::uint64_t t = 0; t < 60; ++t) {
    const std::size_t n = 2 + t % 7;  // up to 8x8
    const Matrix m = random_spd(n, 500 + t);
    Rng rng(900 + t);
    Vector b(n);
    for (double& v : b) v = rng.next_normal();
    const Vector x = solve_spd(m, b);
    const Vector ref = gauss_solve(m, b);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(x[i] - ref[i]) / std::max(1.0, std::abs(ref[i])) < 1e-9);
    }
  }
}

TEST_CASE("cosine") {
  CHECK(cosine(Vector{1, 0}, Vector{1, 0}) == doctest::Approx(1.0));
  CHECK(cosine(Vector{1, 0}, Vector{0, 1}) == doctest::Approx(0.0));
  CHECK(cosine(Vector{1, 1}, Vector{-1, -1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine(Vector{0, 0}, Vector{1, 0}), DegenerateVector);
  CHECK_THROWS_AS(cosine(Vector{1, 0}, Vector{1, 0, 0}), DimensionMismatch);
}
