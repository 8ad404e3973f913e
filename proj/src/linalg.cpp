#include "gridbarrier/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gridbarrier {

namespace {

constexpr double kPivotRelTol = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(what);
}

// In-place LU with row pivoting: P A = L U, unit lower L stored below the
// diagonal.
struct LuFactor {
  Matrix lu;
  std::vector<std::size_t> perm;

  explicit LuFactor(const Matrix& a) : lu(a), perm(a.rows()) {
    require(a.square(), "LU factorization needs a square matrix");
    const std::size_t n = a.rows();
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const double scale = max_abs(a);
    const double tol = kPivotRelTol * (scale > 0.0 ? scale : 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu(k, k));
      for (std::size_t r = k + 1; r < n; ++r) {
        if (std::abs(lu(r, k)) > best) {
          best = std::abs(lu(r, k));
          piv = r;
        }
      }
      if (best < tol || scale == 0.0) {
        throw SingularMatrix("singular matrix: pivot " + std::to_string(best) +
                             " at column " + std::to_string(k));
      }
      if (piv != k) {
        for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(piv, c));
        std::swap(perm[k], perm[piv]);
      }
      const double inv = 1.0 / lu(k, k);
      for (std::size_t r = k + 1; r < n; ++r) {
        const double f = lu(r, k) * inv;
        lu(r, k) = f;
        if (f == 0.0) continue;
        for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= f * lu(k, c);
      }
    }
  }

  Vector solve(std::span<const double> b) const {
    const std::size_t n = lu.rows();
    require(b.size() == n, "right-hand side length does not match matrix");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
      x[i] = s / lu(i, i);
    }
    return x;
  }
};

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix product dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matrix-vector dimension mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum dimension mismatch");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "hstack row mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += std::abs(x);
    m = std::max(m, s);
  }
  return m;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "axpy length mismatch");
  Vector out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  return axpy(-1.0, b, a);
}

Vector solve_linear(const Matrix& a, std::span<const double> b) {
  require(a.square(), "solve_linear needs a square matrix");
  require(a.rows() == b.size(), "solve_linear: right-hand side length mismatch");
  return LuFactor(a).solve(b);
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  require(a.square() && a.rows() == b.rows(), "solve_linear: dimension mismatch");
  const LuFactor lu(a);
  Matrix x(b.rows(), b.cols());
  Vector col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    const Vector s = lu.solve(col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = s[i];
  }
  return x;
}

Matrix invert(const Matrix& a) {
  require(a.square(), "invert needs a square matrix");
  return solve_linear(a, Matrix::identity(a.rows()));
}

bool is_symmetric(const Matrix& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

bool is_spd(const Matrix& a) {
  if (!is_symmetric(a)) return false;
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

}  // namespace gridbarrier
