#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace structsum {

// Dense row-major matrix of doubles. Documents top out around a hundred
// sentences, so no attempt is made at blocked or sparse storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool square() const { return rows_ == cols_ && rows_ > 0; }
  bool all_finite() const;

  Matrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
double max_abs(const Matrix& m);

// P*m = L*U with partial pivoting. L has unit diagonal and is stored in the
// strict lower triangle of lu; U occupies the diagonal and above.
struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;  // perm[k] = source row of pivot row k
  int parity = 1;                 // sign of the permutation
  bool singular = false;          // some pivot magnitude fell below kPivotTol
};

inline constexpr double kPivotTol = 1e-12;

LuFactors lu_factor(const Matrix& m);

// Returns (sign, log|det|). sign is 0 for singular input, in which case the
// log-magnitude is meaningless.
std::pair<int, double> log_abs_det(const Matrix& m);

// Throws numeric_error when a pivot falls below kPivotTol.
Matrix invert(const Matrix& m);

}  // namespace structsum
