#pragma once

#include <cstddef>
#include <vector>

#include "thermodiffuse/errors.hpp"

namespace tdiff {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Takes ownership of data (row-major, length rows*cols); rejects
  // non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, Vector data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  Matrix transposed() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Vector col(std::size_t j) const;
  Vector row(std::size_t i) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, const Vector& x);

// y = A^T x without forming the transpose.
Vector transpose_times(const Matrix& a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& v);

}  // namespace tdiff
