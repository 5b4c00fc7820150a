#include "structsum/fusion.hpp"

#include <cmath>

#include "structsum/error.hpp"
#include "structsum/rng.hpp"

namespace structsum {

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

Matrix tanh_elem(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = std::tanh(v);
  return out;
}

}  // namespace

FusionParams FusionParams::init(std::size_t d_sem, std::size_t d_h, std::size_t d_u,
                                std::size_t d_e, std::uint64_t seed) {
  Rng rng(seed);
  FusionParams p;
  p.d_sem = d_sem;
  p.d_h = d_h;
  p.d_u = d_u;
  p.d_e = d_e;
  p.wr = glorot(d_sem, 3 * d_sem, rng);
  p.g_root.resize(d_sem);
  for (double& v : p.g_root) v = rng.uniform(-0.1, 0.1);
  p.fu = glorot(d_u, d_h, rng);
  p.fe = glorot(d_e, d_u, rng);
  p.validate();
  return p;
}

void FusionParams::validate() const {
  if (d_sem < 1 || d_h < 1 || d_u < 1 || d_e < 1)
    throw validation_error("FusionParams: widths must be >= 1");
  if (wr.rows() != d_sem || wr.cols() != 3 * d_sem || g_root.size() != d_sem ||
      fu.rows() != d_u || fu.cols() != d_h || fe.rows() != d_e || fe.cols() != d_u)
    throw validation_error("FusionParams: shape mismatch");
}

Matrix pool_sentences(const std::vector<Matrix>& token_vecs) {
  if (token_vecs.empty()) throw validation_error("pool_sentences: no sentences");
  const std::size_t d = token_vecs.front().cols();
  Matrix out(token_vecs.size(), d);
  for (std::size_t s = 0; s < token_vecs.size(); ++s) {
    const Matrix& toks = token_vecs[s];
    if (toks.rows() == 0) throw validation_error("pool_sentences: empty sentence");
    if (toks.cols() != d) throw validation_error("pool_sentences: ragged widths");
    for (std::size_t j = 0; j < d; ++j) {
      double mx = toks(0, j);
      for (std::size_t t = 1; t < toks.rows(); ++t) mx = std::max(mx, toks(t, j));
      out(s, j) = mx;
    }
  }
  return out;
}

LatentFusion latent_fuse(const Matrix& g, const TreeMarginals& marg,
                         const FusionParams& params, ChildContextMode mode) {
  params.validate();
  const std::size_t n = g.rows();
  if (marg.n != n || g.cols() != params.d_sem)
    throw validation_error("latent_fuse: shape mismatch");

  LatentFusion out;
  out.p = Matrix(n, params.d_sem);
  out.c = Matrix(n, params.d_sem);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < params.d_sem; ++k) {
      double p = marg.a_root[i] * params.g_root[k];
      for (std::size_t j = 0; j < n; ++j) p += marg.a(j, i) * g(j, k);
      out.p(i, k) = p;
    }
    if (mode == ChildContextMode::kChildVectors) {
      for (std::size_t k = 0; k < params.d_sem; ++k) {
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) c += marg.a(i, j) * g(j, k);
        out.c(i, k) = c;
      }
    } else {
      double mass = 0.0;
      for (std::size_t j = 0; j < n; ++j) mass += marg.a(i, j);
      for (std::size_t k = 0; k < params.d_sem; ++k) out.c(i, k) = mass * g(i, k);
    }
  }

  out.l = Matrix(n, params.d_sem);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t row = 0; row < params.d_sem; ++row) {
      double z = 0.0;
      for (std::size_t k = 0; k < params.d_sem; ++k) {
        z += params.wr(row, k) * g(i, k);
        z += params.wr(row, params.d_sem + k) * out.p(i, k);
        z += params.wr(row, 2 * params.d_sem + k) * out.c(i, k);
      }
      out.l(i, row) = std::tanh(z);
    }
  }
  return out;
}

ExplicitFusion explicit_fuse(const Matrix& h, const Matrix& k, const FusionParams& params) {
  params.validate();
  const std::size_t n = h.rows();
  if (h.cols() != params.d_h || k.rows() != n || k.cols() != n)
    throw validation_error("explicit_fuse: shape mismatch");
  if (!k.all_finite()) throw validation_error("explicit_fuse: non-finite adjacency");

  ExplicitFusion out;
  out.u = tanh_elem(matmul(h, params.fu.transposed()));
  out.t = matmul(k, out.u);
  out.e = tanh_elem(matmul(out.t, params.fe.transposed()));
  return out;
}

FusedReps combine_and_augment(const Matrix& l, const Matrix& e,
                              const std::vector<Matrix>& token_vecs) {
  const std::size_t n = l.rows();
  if (e.rows() != n) throw validation_error("combine_and_augment: sentence count mismatch");
  if (token_vecs.size() != n)
    throw validation_error("combine_and_augment: token sentence count mismatch");

  FusedReps out;
  out.l = l;
  out.e = e;
  const std::size_t d_l = l.cols(), d_e = e.cols();
  out.h_sent = Matrix(n, d_l + d_e);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d_l; ++k) out.h_sent(i, k) = l(i, k);
    for (std::size_t k = 0; k < d_e; ++k) out.h_sent(i, d_l + k) = e(i, k);
  }
  out.h_tok.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& toks = token_vecs[i];
    Matrix aug(toks.rows(), toks.cols() + d_l + d_e);
    for (std::size_t t = 0; t < toks.rows(); ++t) {
      for (std::size_t k = 0; k < toks.cols(); ++k) aug(t, k) = toks(t, k);
      for (std::size_t k = 0; k < d_l + d_e; ++k)
        aug(t, toks.cols() + k) = out.h_sent(i, k);
    }
    out.h_tok.push_back(std::move(aug));
  }
  return out;
}

FusionGradients fusion_backward(const Matrix& g, const TreeMarginals& marg,
                                const Matrix& h, const Matrix& k,
                                const FusionParams& params,
                                const Matrix& upstream_l, const Matrix& upstream_e,
                                ChildContextMode mode) {
  const std::size_t n = g.rows();
  const std::size_t d_sem = params.d_sem;
  if (upstream_l.rows() != n || upstream_l.cols() != d_sem || upstream_e.rows() != n ||
      upstream_e.cols() != params.d_e)
    throw validation_error("fusion_backward: upstream shape mismatch");

  const LatentFusion lf = latent_fuse(g, marg, params, mode);
  const ExplicitFusion ef = explicit_fuse(h, k, params);

  FusionGradients grads;
  grads.d_g = Matrix(n, d_sem);
  grads.d_h = Matrix(n, params.d_h);
  grads.d_wr = Matrix(d_sem, 3 * d_sem);
  grads.d_g_root.assign(d_sem, 0.0);
  grads.d_fu = Matrix(params.d_u, params.d_h);
  grads.d_fe = Matrix(params.d_e, params.d_u);

  // Latent path: l = tanh(Wr x), x = [g; p; c].
  Matrix g_p(n, d_sem), g_c(n, d_sem);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> g_z(d_sem);
    for (std::size_t row = 0; row < d_sem; ++row)
      g_z[row] = upstream_l(i, row) * (1.0 - lf.l(i, row) * lf.l(i, row));
    for (std::size_t row = 0; row < d_sem; ++row) {
      for (std::size_t kk = 0; kk < d_sem; ++kk) {
        grads.d_wr(row, kk) += g_z[row] * g(i, kk);
        grads.d_wr(row, d_sem + kk) += g_z[row] * lf.p(i, kk);
        grads.d_wr(row, 2 * d_sem + kk) += g_z[row] * lf.c(i, kk);
        grads.d_g(i, kk) += g_z[row] * params.wr(row, kk);
        g_p(i, kk) += g_z[row] * params.wr(row, d_sem + kk);
        g_c(i, kk) += g_z[row] * params.wr(row, 2 * d_sem + kk);
      }
    }
  }
  // p_i = sum_j a(j,i) g_j + a_root[i] g_root
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t kk = 0; kk < d_sem; ++kk) {
      grads.d_g_root[kk] += marg.a_root[i] * g_p(i, kk);
      for (std::size_t j = 0; j < n; ++j) grads.d_g(j, kk) += marg.a(j, i) * g_p(i, kk);
    }
  }
  if (mode == ChildContextMode::kChildVectors) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t kk = 0; kk < d_sem; ++kk)
          grads.d_g(j, kk) += marg.a(i, j) * g_c(i, kk);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double mass = 0.0;
      for (std::size_t j = 0; j < n; ++j) mass += marg.a(i, j);
      for (std::size_t kk = 0; kk < d_sem; ++kk) grads.d_g(i, kk) += mass * g_c(i, kk);
    }
  }

  // Explicit path: e = tanh(Fe t), t = K u, u = tanh(Fu h).
  Matrix g_t(n, params.d_u);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> g_ze(params.d_e);
    for (std::size_t row = 0; row < params.d_e; ++row)
      g_ze[row] = upstream_e(i, row) * (1.0 - ef.e(i, row) * ef.e(i, row));
    for (std::size_t row = 0; row < params.d_e; ++row)
      for (std::size_t kk = 0; kk < params.d_u; ++kk) {
        grads.d_fe(row, kk) += g_ze[row] * ef.t(i, kk);
        g_t(i, kk) += g_ze[row] * params.fe(row, kk);
      }
  }
  const Matrix g_u = matmul(k.transposed(), g_t);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> g_zu(params.d_u);
    for (std::size_t row = 0; row < params.d_u; ++row)
      g_zu[row] = g_u(j, row) * (1.0 - ef.u(j, row) * ef.u(j, row));
    for (std::size_t row = 0; row < params.d_u; ++row)
      for (std::size_t kk = 0; kk < params.d_h; ++kk) {
        grads.d_fu(row, kk) += g_zu[row] * h(j, kk);
        grads.d_h(j, kk) += g_zu[row] * params.fu(row, kk);
      }
  }
  return grads;
}

}  // namespace structsum
