#include "structsum/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "structsum/error.hpp"

namespace structsum {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw validation_error("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw validation_error("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double max_abs(const Matrix& m) {
  double mx = 0.0;
  for (double v : m.data()) mx = std::max(mx, std::fabs(v));
  return mx;
}

LuFactors lu_factor(const Matrix& m) {
  if (!m.square()) throw validation_error("lu_factor: matrix must be square");
  if (!m.all_finite()) throw validation_error("lu_factor: non-finite entries");
  const std::size_t n = m.rows();
  LuFactors f;
  f.lu = m;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(f.lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kPivotTol) {
      f.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.parity = -f.parity;
    }
    const double pivot = f.lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = f.lu(i, k) / pivot;
      f.lu(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
    }
  }
  return f;
}

std::pair<int, double> log_abs_det(const Matrix& m) {
  const LuFactors f = lu_factor(m);
  if (f.singular) return {0, 0.0};
  int sign = f.parity;
  double logmag = 0.0;
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const double d = f.lu(k, k);
    if (d < 0.0) sign = -sign;
    logmag += std::log(std::fabs(d));
  }
  return {sign, logmag};
}

Matrix invert(const Matrix& m) {
  const LuFactors f = lu_factor(m);
  if (f.singular) throw numeric_error("invert: matrix is singular (pivot below 1e-12)");
  const std::size_t n = m.rows();
  Matrix inv(n, n);
  std::vector<double> col(n), x(n);
  for (std::size_t c = 0; c < n; ++c) {
    // Solve P m x = e_c column by column: forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) col[i] = (f.perm[i] == c) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = col[i];
      for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.lu(ii, j) * x[j];
      x[ii] /= f.lu(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
  }
  return inv;
}

}  // namespace structsum
