#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "gridbarrier/errors.hpp"

namespace gridbarrier {

using Vector = std::vector<double>;

// Dense row-major matrix. Networks handled here have at most a few hundred
// buses, so nothing sparse is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

// Horizontal concatenation [a b].
Matrix hstack(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
// Induced infinity norm (max absolute row sum).
double norm_inf(const Matrix& a);
double max_abs(const Matrix& a);

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);
Vector subtract(std::span<const double> a, std::span<const double> b);

// Gaussian elimination with partial (row) pivoting. Throws SingularMatrix when
// a pivot falls below 1e-12 relative to the largest entry of `a`.
Vector solve_linear(const Matrix& a, std::span<const double> b);

// Solve for several right-hand sides sharing one factorization.
Matrix solve_linear(const Matrix& a, const Matrix& b);

Matrix invert(const Matrix& a);

// Symmetric within 1e-9 and Cholesky succeeds (all leading minors positive).
bool is_spd(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol = 1e-9);

}  // namespace gridbarrier
