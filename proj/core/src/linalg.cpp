#include "thermodiffuse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermodiffuse/errors.hpp"

namespace tdiff {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTol = 1e-12;

// Applies the sign convention: the largest-magnitude component of each
// column of `lead` is made non-negative (ties broken by lowest index); the
// paired column of `other` is flipped along with it.
void fix_column_signs(Matrix& lead, Matrix& other) {
  for (std::size_t j = 0; j < lead.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < lead.rows(); ++i) {
      const double a = std::fabs(lead(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (lead(arg, j) < 0.0) {
      for (std::size_t i = 0; i < lead.rows(); ++i) lead(i, j) = -lead(i, j);
      if (j < other.cols())
        for (std::size_t i = 0; i < other.rows(); ++i) other(i, j) = -other(i, j);
    }
  }
}

// SVD of a tall-or-square matrix (rows >= cols) by one-sided Jacobi:
// orthogonalize the columns of a working copy by plane rotations accumulated
// into V; the surviving column norms are the singular values.
SvdResult svd_tall(const Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  Matrix a = m;
  Matrix v = Matrix::identity(cols);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::fabs(apq) <= kOffDiagTol * std::sqrt(app * aqq)) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (!converged) {
    throw NonConvergence("jacobi svd did not converge for " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix after " + std::to_string(kMaxSweeps) +
                         " sweeps");
  }

  Vector sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }

  // Stable descending reorder.
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Matrix u(rows, cols);
  Matrix vs(cols, cols);
  Vector ss(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t src = order[j];
    ss[j] = sigma[src];
    for (std::size_t i = 0; i < cols; ++i) vs(i, j) = v(i, src);
    if (sigma[src] > 0.0) {
      for (std::size_t i = 0; i < rows; ++i) u(i, j) = a(i, src) / sigma[src];
    }
  }

  // Columns with zero singular value get an orthonormal completion so U
  // stays column-orthonormal (deterministic Gram-Schmidt over unit vectors).
  for (std::size_t j = 0; j < cols; ++j) {
    if (ss[j] > 0.0) continue;
    for (std::size_t cand = 0; cand < rows; ++cand) {
      Vector e(rows, 0.0);
      e[cand] = 1.0;
      for (std::size_t jj = 0; jj < cols; ++jj) {
        if (jj == j || (ss[jj] == 0.0 && jj > j)) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < rows; ++i) proj += u(i, jj) * e[i];
        for (std::size_t i = 0; i < rows; ++i) e[i] -= proj * u(i, jj);
      }
      const double n = norm(e);
      if (n > 1e-8) {
        for (std::size_t i = 0; i < rows; ++i) u(i, j) = e[i] / n;
        break;
      }
    }
  }

  fix_column_signs(u, vs);
  return {std::move(u), std::move(ss), std::move(vs)};
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionMismatch("svd: empty matrix");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult r = svd_tall(m.transposed());
  // m = (m^T)^T = (U S V^T)^T = V S U^T, then re-apply the sign rule to the
  // new left factor.
  std::swap(r.u, r.v);
  fix_column_signs(r.u, r.v);
  return r;
}

EigResult sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ContractViolation("sym_eig: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", not square");
  }
  const std::size_t n = m.rows();
  const double fro = m.frobenius_norm();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = m(i, j) - m(j, i);
      asym += 2.0 * d * d;
    }
  asym = std::sqrt(asym);
  if (asym > 1e-12 * std::max(1.0, fro)) {
    throw ContractViolation("sym_eig: asymmetry " + std::to_string(asym) +
                            " exceeds 1e-12 relative tolerance");
  }

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  Matrix q = Matrix::identity(n);

  // entries below this are noise-level; without the absolute floor, pairs
  // whose diagonal entries are both ~0 would be rotated forever
  const double floor_tol = kOffDiagTol * std::max(fro, 1e-300);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (std::fabs(apr) <= floor_tol) continue;
        if (std::fabs(apr) <= kOffDiagTol * std::sqrt(std::fabs(a(p, p) * a(r, r)))) continue;
        converged = false;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), air = a(i, r);
          a(i, p) = c * aip - s * air;
          a(i, r) = s * aip + c * air;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i), ari = a(r, i);
          a(p, i) = c * api - s * ari;
          a(r, i) = s * api + c * ari;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double qip = q(i, p), qir = q(i, r);
          q(i, p) = c * qip - s * qir;
          q(i, r) = s * qip + c * qir;
        }
      }
    }
  }
  if (!converged) {
    throw NonConvergence("jacobi eigensolve did not converge for " + std::to_string(n) + "x" +
                         std::to_string(n) + " matrix after " + std::to_string(kMaxSweeps) +
                         " sweeps");
  }

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });

  EigResult res;
  res.values.resize(n);
  res.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    res.values[j] = values[order[j]];
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = q(i, order[j]);
  }
  Matrix none(0, 0);
  fix_column_signs(res.vectors, none);
  return res;
}

CholeskyFactor::CholeskyFactor(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ContractViolation("cholesky: matrix is not square");
  }
  const std::size_t n = m.rows();
  l_ = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (d <= 0.0 || !std::isfinite(d)) {
      throw NotPositiveDefinite(
          "cholesky: non-positive pivot " + std::to_string(d) + " at index " + std::to_string(j),
          j);
    }
    l_(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / l_(j, j);
    }
  }
}

Vector CholeskyFactor::solve(const Vector& b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) throw DimensionMismatch("cholesky solve: rhs size mismatch");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
    y[i] = s / l_(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
    x[ii] = s / l_(ii, ii);
  }
  return x;
}

Vector solve_spd(const Matrix& m, const Vector& b) { return CholeskyFactor(m).solve(b); }

double cosine(const Vector& a, const Vector& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateVector("cosine: zero vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace tdiff
