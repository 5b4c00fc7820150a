#include <cmath>

#include "doctest.h"
#include "structsum/error.hpp"
#include "structsum/fusion.hpp"
#include "structsum/rng.hpp"
#include "structsum/trainer.hpp"

using namespace structsum;

namespace {

Matrix single_row(std::initializer_list<double> vals) {
  Matrix m(1, vals.size());
  std::size_t j = 0;
  for (double v : vals) m(0, j++) = v;
  return m;
}

}  // namespace

TEST_CASE("pool_sentences coordinate max") {
  Matrix toks(2, 2);
  toks(0, 0) = 1.0;
  toks(0, 1) = 2.0;
  toks(1, 0) = 3.0;
  toks(1, 1) = 0.0;
  const Matrix pooled = pool_sentences({toks});
  CHECK(pooled(0, 0) == 3.0);
  CHECK(pooled(0, 1) == 2.0);
}

TEST_CASE("pool_sentences single token and negatives") {
  const Matrix one = pool_sentences({single_row({-0.5, 4.0})});
  CHECK(one(0, 0) == -0.5);
  CHECK(one(0, 1) == 4.0);

  Matrix neg(2, 2);
  neg(0, 0) = -1.0;
  neg(0, 1) = -2.0;
  neg(1, 0) = -3.0;
  neg(1, 1) = -1.0;
  const Matrix pooled = pool_sentences({neg});
  CHECK(pooled(0, 0) == -1.0);
  CHECK(pooled(0, 1) == -1.0);
}

TEST_CASE("pool_sentences rejects empty sentences and is permutation invariant") {
  CHECK_THROWS_AS(pool_sentences({Matrix(0, 2)}), validation_error);

  Rng rng(3);
  Matrix toks(4, 3);
  for (double& v : toks.data()) v = rng.uniform(-1.0, 1.0);
  Matrix shuffled(4, 3);
  const std::size_t order[4] = {2, 0, 3, 1};
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t k = 0; k < 3; ++k) shuffled(t, k) = toks(order[t], k);
  const Matrix a = pool_sentences({toks});
  const Matrix b = pool_sentences({shuffled});
  for (std::size_t k = 0; k < 3; ++k) CHECK(a(0, k) == b(0, k));
}

TEST_CASE("latent_fuse single node hand example") {
  // n=1: p_0 = g_root, c_0 = 0, l_0 = tanh(Wr [g, p, c]).
  FusionParams params;
  params.d_sem = 1;
  params.d_h = 1;
  params.d_u = 1;
  params.d_e = 1;
  params.wr = single_row({1.0, 1.0, 1.0});
  params.g_root = {0.25};
  params.fu = single_row({1.0});
  params.fe = single_row({1.0});

  TreeMarginals m;
  m.n = 1;
  m.a = Matrix(1, 1);
  m.a_root = {1.0};

  const auto lf = latent_fuse(single_row({0.5}), m, params);
  CHECK(lf.p(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(lf.c(0, 0) == 0.0);
  CHECK(lf.l(0, 0) == doctest::Approx(std::tanh(0.75)).epsilon(1e-9));
  CHECK(lf.l(0, 0) == doctest::Approx(0.635149).epsilon(1e-6));
}

TEST_CASE("latent_fuse with zero marginals reduces to Wr[g,0,0]") {
  FusionParams params = FusionParams::init(2, 2, 2, 2, 5);
  TreeMarginals m;
  m.n = 2;
  m.a = Matrix(2, 2);
  m.a_root = {0.0, 0.0};
  Matrix g(2, 2);
  g(0, 0) = 0.3;
  g(1, 1) = -0.6;
  const auto lf = latent_fuse(g, m, params);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t row = 0; row < 2; ++row) {
      double z = 0.0;
      for (std::size_t k = 0; k < 2; ++k) z += params.wr(row, k) * g(i, k);
      CHECK(lf.l(i, row) == doctest::Approx(std::tanh(z)).epsilon(1e-12));
    }
    CHECK(lf.p(i, 0) == 0.0);
    CHECK(lf.c(i, 0) == 0.0);
  }
}

TEST_CASE("latent_fuse symmetric marginals with equal g gives equal l") {
  FusionParams params = FusionParams::init(1, 1, 1, 1, 9);
  TreeMarginals m;
  m.n = 2;
  m.a = Matrix(2, 2);
  m.a(0, 1) = 0.5;
  m.a(1, 0) = 0.5;
  m.a_root = {0.5, 0.5};
  Matrix g(2, 1, 0.4);
  const auto lf = latent_fuse(g, m, params);
  CHECK(lf.l(0, 0) == doctest::Approx(lf.l(1, 0)).epsilon(1e-12));
}

TEST_CASE("latent self-scaled mode reproduces the printed formula") {
  FusionParams params = FusionParams::init(2, 2, 2, 2, 13);
  TreeMarginals m;
  m.n = 2;
  m.a = Matrix(2, 2);
  m.a(0, 1) = 0.7;
  m.a(1, 0) = 0.2;
  m.a_root = {0.3, 0.8};
  Rng rng(4);
  Matrix g(2, 2);
  for (double& v : g.data()) v = rng.uniform(-1.0, 1.0);
  const auto lf = latent_fuse(g, m, params, ChildContextMode::kSelfScaled);
  // c_i = (sum_j a(i,j)) * g_i under the literal printed equation
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(lf.c(0, k) == doctest::Approx(0.7 * g(0, k)).epsilon(1e-12));
    CHECK(lf.c(1, k) == doctest::Approx(0.2 * g(1, k)).epsilon(1e-12));
  }
}

TEST_CASE("explicit_fuse hand example") {
  FusionParams params;
  params.d_sem = 1;
  params.d_h = 1;
  params.d_u = 1;
  params.d_e = 1;
  params.wr = single_row({1.0, 1.0, 1.0});
  params.g_root = {0.0};
  params.fu = single_row({1.0});
  params.fe = single_row({1.0});

  Matrix h(2, 1);
  h(0, 0) = 1.0;
  h(1, 0) = -1.0;
  Matrix k(2, 2);
  k(0, 1) = 1.0;
  k(1, 0) = 1.0;
  const auto ef = explicit_fuse(h, k, params);
  CHECK(ef.u(0, 0) == doctest::Approx(0.761594).epsilon(1e-6));
  CHECK(ef.u(1, 0) == doctest::Approx(-0.761594).epsilon(1e-6));
  CHECK(ef.t(0, 0) == doctest::Approx(-0.761594).epsilon(1e-6));
  CHECK(ef.e(0, 0) == doctest::Approx(-0.642015).epsilon(1e-6));
}

TEST_CASE("explicit_fuse identity mixing and zero input") {
  FusionParams params = FusionParams::init(1, 2, 2, 2, 31);
  const Matrix k = Matrix::identity(2);
  Rng rng(6);
  Matrix h(2, 2);
  for (double& v : h.data()) v = rng.uniform(-1.0, 1.0);
  const auto ef = explicit_fuse(h, k, params);
  // With K = I, t = u, so e_i = tanh(Fe tanh(Fu h_i)).
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t kk = 0; kk < 2; ++kk)
      CHECK(ef.t(i, kk) == doctest::Approx(ef.u(i, kk)).epsilon(1e-12));

  const auto zero = explicit_fuse(Matrix(2, 2), k, params);
  for (double v : zero.e.data()) CHECK(v == 0.0);
}

TEST_CASE("tanh outputs stay inside (-1, 1)") {
  FusionParams params = FusionParams::init(3, 3, 3, 3, 17);
  Rng rng(18);
  Matrix g(4, 3), h(4, 3), k(4, 4);
  for (double& v : g.data()) v = rng.uniform(-5.0, 5.0);
  for (double& v : h.data()) v = rng.uniform(-5.0, 5.0);
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) row += (k(i, j) = rng.uniform(0.1, 1.0));
    for (std::size_t j = 0; j < 4; ++j) k(i, j) /= row;
  }
  TreeMarginals m;
  m.n = 4;
  m.a = Matrix(4, 4);
  m.a_root = {0.25, 0.25, 0.25, 0.25};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) m.a(i, j) = 0.25;

  const auto lf = latent_fuse(g, m, params);
  for (double v : lf.l.data()) CHECK(std::fabs(v) < 1.0);
  const auto ef = explicit_fuse(h, k, params);
  for (double v : ef.u.data()) CHECK(std::fabs(v) < 1.0);
  for (double v : ef.e.data()) CHECK(std::fabs(v) < 1.0);
}

TEST_CASE("parent context stays in the convex hull coordinate-wise") {
  // With normalized marginals, p_i is a convex combination of g rows + g_root.
  FusionParams params = FusionParams::init(1, 1, 1, 1, 77);
  params.g_root = {0.9};
  TreeMarginals m;
  m.n = 3;
  m.a = Matrix(3, 3);
  m.a(0, 1) = 0.25;
  m.a(2, 1) = 0.5;
  m.a(1, 0) = 0.6;
  m.a(1, 2) = 0.3;
  m.a_root = {0.4, 0.25, 0.7};
  Matrix g(3, 1);
  g(0, 0) = -0.8;
  g(1, 0) = 0.1;
  g(2, 0) = 0.5;
  const auto lf = latent_fuse(g, m, params);
  const double lo = std::min({-0.8, 0.1, 0.5, 0.9});
  const double hi = std::max({-0.8, 0.1, 0.5, 0.9});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(lf.p(i, 0) >= lo - 1e-12);
    CHECK(lf.p(i, 0) <= hi + 1e-12);
  }
}

TEST_CASE("combine_and_augment concatenation and token routing") {
  Matrix l(2, 1), e(2, 1);
  l(0, 0) = 1.0;
  e(0, 0) = 2.0;
  l(1, 0) = -1.0;
  e(1, 0) = -2.0;
  const FusedReps fr = combine_and_augment(l, e, {single_row({9.0}), single_row({7.0})});
  CHECK(fr.h_sent(0, 0) == 1.0);
  CHECK(fr.h_sent(0, 1) == 2.0);
  CHECK(fr.h_tok[0](0, 0) == 9.0);
  CHECK(fr.h_tok[0](0, 1) == 1.0);
  CHECK(fr.h_tok[0](0, 2) == 2.0);
  // tokens of sentence 1 carry sentence 1's vector only
  CHECK(fr.h_tok[1](0, 1) == -1.0);
  CHECK(fr.h_tok[1](0, 2) == -2.0);
}

TEST_CASE("fusion_backward zero upstream gives zero gradients") {
  FusionParams params = FusionParams::init(2, 2, 2, 2, 1);
  TreeMarginals m;
  m.n = 2;
  m.a = Matrix(2, 2);
  m.a(0, 1) = 0.5;
  m.a(1, 0) = 0.5;
  m.a_root = {0.5, 0.5};
  Matrix g(2, 2, 0.1), h(2, 2, 0.2), k(2, 2);
  k(0, 1) = 1.0;
  k(1, 0) = 1.0;
  const auto grads = fusion_backward(g, m, h, k, params, Matrix(2, 2), Matrix(2, 2));
  for (double v : grads.d_g.data()) CHECK(v == 0.0);
  for (double v : grads.d_wr.data()) CHECK(v == 0.0);
  for (double v : grads.d_fu.data()) CHECK(v == 0.0);
}

TEST_CASE("fusion_backward scalar tanh chain matches hand derivative") {
  // d_sem=1, one sentence: l = tanh(w1 g + w2 p + w3 c), p = a_r * g_root.
  FusionParams params;
  params.d_sem = 1;
  params.d_h = 1;
  params.d_u = 1;
  params.d_e = 1;
  params.wr = single_row({0.7, -0.4, 0.9});
  params.g_root = {0.3};
  params.fu = single_row({0.5});
  params.fe = single_row({-0.8});
  TreeMarginals m;
  m.n = 1;
  m.a = Matrix(1, 1);
  m.a_root = {1.0};
  const double gval = 0.6;
  Matrix g = single_row({gval});
  Matrix h = single_row({0.2});
  Matrix k(1, 1);
  Matrix up_l = single_row({1.0});
  Matrix up_e(1, 1);

  const auto grads = fusion_backward(g, m, h, k, params, up_l, up_e);
  const double z = 0.7 * gval + (-0.4) * 0.3;
  const double dl_dz = 1.0 - std::tanh(z) * std::tanh(z);
  CHECK(grads.d_g(0, 0) == doctest::Approx(dl_dz * 0.7).epsilon(1e-12));
  CHECK(grads.d_g_root[0] == doctest::Approx(dl_dz * (-0.4)).epsilon(1e-12));
  CHECK(grads.d_wr(0, 0) == doctest::Approx(dl_dz * gval).epsilon(1e-12));
  CHECK(grads.d_wr(0, 1) == doctest::Approx(dl_dz * 0.3).epsilon(1e-12));
  CHECK(grads.d_wr(0, 2) == 0.0);
}

TEST_CASE("fusion_backward matches finite differences, both child modes") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto mixed = gradient_check(GradCheckComponent::kFusion, seed, 1e-4);
    CAPTURE(seed);
    CAPTURE(mixed.max_rel_err);
    CHECK(mixed.pass);
    const auto literal = gradient_check(GradCheckComponent::kFusionLiteralC, seed, 1e-4);
    CAPTURE(literal.max_rel_err);
    CHECK(literal.pass);
  }
}
