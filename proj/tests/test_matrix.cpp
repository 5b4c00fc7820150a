#include <cmath>

#include "doctest.h"
#include "structsum/error.hpp"
#include "structsum/matrix.hpp"
#include "structsum/rng.hpp"

using namespace structsum;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// P^-1 L U reconstruction from the packed factors.
Matrix reconstruct(const LuFactors& f) {
  const std::size_t n = f.lu.rows();
  Matrix l = Matrix::identity(n), u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      (i > j ? l(i, j) : u(i, j)) = f.lu(i, j);
  const Matrix lu = matmul(l, u);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(f.perm[i], j) = lu(i, j);
  return out;
}

}  // namespace

TEST_CASE("lu_factor identity") {
  const auto f = lu_factor(Matrix::identity(2));
  CHECK(!f.singular);
  CHECK(f.parity == 1);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(f.lu(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("lu_factor reconstruction") {
  const Matrix m = from_rows({{2, 1}, {1, 2}});
  const auto f = lu_factor(m);
  CHECK(!f.singular);
  const Matrix back = reconstruct(f);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(std::fabs(back(i, j) - m(i, j)) < 1e-12);
}

TEST_CASE("lu_factor flags rank deficiency") {
  CHECK(lu_factor(from_rows({{1, 1}, {1, 1}})).singular);
}

TEST_CASE("lu_factor rejects bad input") {
  CHECK_THROWS_AS(lu_factor(Matrix(2, 3)), validation_error);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(lu_factor(bad), validation_error);
}

TEST_CASE("log_abs_det basics") {
  auto [s1, l1] = log_abs_det(Matrix::identity(3));
  CHECK(s1 == 1);
  CHECK(l1 == doctest::Approx(0.0).epsilon(1e-12));

  auto [s2, l2] = log_abs_det(from_rows({{2, 0}, {0, 3}}));
  CHECK(s2 == 1);
  CHECK(l2 == doctest::Approx(std::log(6.0)).epsilon(1e-12));

  // det [[2,1],[1,2]] = 3 by cofactor expansion
  auto [s3, l3] = log_abs_det(from_rows({{2, 1}, {1, 2}}));
  CHECK(s3 == 1);
  CHECK(l3 == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  auto [s4, l4] = log_abs_det(from_rows({{1, 1}, {1, 1}}));
  CHECK(s4 == 0);
}

TEST_CASE("invert diagonal and identity") {
  const Matrix inv = invert(from_rows({{2, 0}, {0, 4}}));
  CHECK(inv(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(inv(0, 1) == 0.0);

  const Matrix id_inv = invert(Matrix::identity(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(id_inv(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("invert residual on random well-conditioned 5x5") {
  Rng rng(99);
  Matrix m(5, 5);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < 5; ++i) m(i, i) += 5.0;
  const Matrix prod = matmul(m, invert(m));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::fabs(prod(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("invert raises singularity error") {
  CHECK_THROWS_AS(invert(from_rows({{1, 1}, {1, 1}})), numeric_error);
}

TEST_CASE("property: double inversion returns the original") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(5));
    Matrix m(n, n);
    for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 4.0;
    const Matrix back = invert(invert(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(std::fabs(back(i, j) - m(i, j)) < 1e-8);
  }
}

TEST_CASE("property: log|det(AB)| = log|det A| + log|det B|") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(4));
    Matrix a(n, n), b(n, n);
    for (double& v : a.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : b.data()) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      a(i, i) += 3.0;
      b(i, i) += 3.0;
    }
    auto [sa, la] = log_abs_det(a);
    auto [sb, lb] = log_abs_det(b);
    auto [sab, lab] = log_abs_det(matmul(a, b));
    CHECK(sab == sa * sb);
    CHECK(lab == doctest::Approx(la + lb).epsilon(1e-9));
  }
}

TEST_CASE("property: reconstruction residual bound") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(6));
    Matrix m(n, n);
    for (double& v : m.data()) v = rng.uniform(-2.0, 2.0);
    const auto f = lu_factor(m);
    if (f.singular) continue;
    const Matrix back = reconstruct(f);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        resid = std::max(resid, std::fabs(back(i, j) - m(i, j)));
    CHECK(resid <= 1e-10 * (1.0 + max_abs(m)));
  }
}
