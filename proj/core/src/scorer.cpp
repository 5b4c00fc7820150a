#include "structsum/scorer.hpp"

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

}  // namespace

ScorerParams ScorerParams::init(std::size_t d_struct, std::size_t d_proj,
                                std::uint64_t seed) {
  if (d_struct < 1 || d_proj < 1)
    throw validation_error("ScorerParams: widths must be >= 1");
  Rng rng(seed);
  ScorerParams p;
  p.d_struct = d_struct;
  p.d_proj = d_proj;
  p.fp = glorot(d_proj, d_struct, rng);
  p.fc = glorot(d_proj, d_struct, rng);
  p.wa = glorot(d_proj, d_proj, rng);
  p.fr = glorot(1, d_struct, rng);
  return p;
}

void ScorerParams::validate() const {
  if (d_struct < 1 || d_proj < 1) throw validation_error("ScorerParams: widths must be >= 1");
  if (fp.rows() != d_proj || fp.cols() != d_struct || fc.rows() != d_proj ||
      fc.cols() != d_struct || wa.rows() != d_proj || wa.cols() != d_proj ||
      fr.rows() != 1 || fr.cols() != d_struct)
    throw validation_error("ScorerParams: shape mismatch");
  if (!fp.all_finite() || !fc.all_finite() || !wa.all_finite() || !fr.all_finite())
    throw validation_error("ScorerParams: non-finite entries");
}

SplitReps split_reps(const SentenceReps& reps) {
  if (reps.n < 1 || reps.h.rows() != reps.n)
    throw validation_error("split_reps: bad sentence count");
  const std::size_t width = reps.h.cols();
  if (reps.d_sem < 1 || reps.d_sem >= width)
    throw validation_error("split_reps: split point must leave both g and d nonempty");
  const std::size_t d_struct = width - reps.d_sem;
  SplitReps out;
  out.g = Matrix(reps.n, reps.d_sem);
  out.d = Matrix(reps.n, d_struct);
  for (std::size_t i = 0; i < reps.n; ++i) {
    for (std::size_t j = 0; j < reps.d_sem; ++j) out.g(i, j) = reps.h(i, j);
    for (std::size_t j = 0; j < d_struct; ++j) out.d(i, j) = reps.h(i, reps.d_sem + j);
  }
  return out;
}

EdgeScores score_edges(const Matrix& d_vecs, const ScorerParams& params) {
  params.validate();
  if (d_vecs.cols() != params.d_struct)
    throw validation_error("score_edges: structure width mismatch");
  const std::size_t n = d_vecs.rows();
  if (n < 1) throw validation_error("score_edges: need at least one sentence");

  // p_i = Fp d_i, c_j = Fc d_j as rows; f = p Wa c^T.
  const Matrix p = matmul(d_vecs, params.fp.transposed());
  const Matrix c = matmul(d_vecs, params.fc.transposed());
  EdgeScores out;
  out.n = n;
  out.f = matmul(matmul(p, params.wa), c.transposed());
  out.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t k = 0; k < params.d_struct; ++k) r += params.fr(0, k) * d_vecs(i, k);
    out.r[i] = r;
  }
  return out;
}

ScorerGradients score_backward(const Matrix& d_vecs, const ScorerParams& params,
                               const Matrix& upstream_f,
                               const std::vector<double>& upstream_r) {
  params.validate();
  const std::size_t n = d_vecs.rows();
  if (d_vecs.cols() != params.d_struct)
    throw validation_error("score_backward: structure width mismatch");
  if (upstream_f.rows() != n || upstream_f.cols() != n || upstream_r.size() != n)
    throw validation_error("score_backward: upstream shape mismatch");

  const Matrix p = matmul(d_vecs, params.fp.transposed());  // n x d_proj
  const Matrix c = matmul(d_vecs, params.fc.transposed());

  // f = p Wa c^T
  const Matrix g_p = matmul(upstream_f, matmul(c, params.wa.transposed()));
  const Matrix g_c = matmul(upstream_f.transposed(), matmul(p, params.wa));

  ScorerGradients g;
  g.d_wa = matmul(matmul(p.transposed(), upstream_f), c);
  g.d_fp = matmul(g_p.transposed(), d_vecs);
  g.d_fc = matmul(g_c.transposed(), d_vecs);
  g.d_fr = Matrix(1, params.d_struct);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < params.d_struct; ++k)
      g.d_fr(0, k) += upstream_r[i] * d_vecs(i, k);

  g.d_vecs = matmul(g_p, params.fp);
  const Matrix via_c = matmul(g_c, params.fc);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < params.d_struct; ++k) {
      g.d_vecs(i, k) += via_c(i, k) + upstream_r[i] * params.fr(0, k);
    }
  return g;
}

}  // namespace structsum
