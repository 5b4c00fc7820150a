#pragma once

#include <cstdint>
#include <vector>

#include "structsum/matrix.hpp"
#include "structsum/tree.hpp"

namespace structsum {

// Bilinear edge scorer over structure vectors:
//   f(i,j) = (Fp d_i)^T Wa (Fc d_j),  r(i) = Fr d_i.
// Projections carry no bias terms.
struct ScorerParams {
  std::size_t d_struct = 0;
  std::size_t d_proj = 0;
  Matrix fp;  // d_proj x d_struct
  Matrix fc;  // d_proj x d_struct
  Matrix wa;  // d_proj x d_proj
  Matrix fr;  // 1 x d_struct

  // Glorot-uniform initialization from a seeded generator.
  static ScorerParams init(std::size_t d_struct, std::size_t d_proj, std::uint64_t seed);
  void validate() const;
};

// Sentence vectors with the semantic/structure split point.
struct SentenceReps {
  std::size_t n = 0;
  std::size_t d_sem = 0;
  Matrix h;  // n x (d_sem + d_struct)
};

struct SplitReps {
  Matrix g;  // n x d_sem
  Matrix d;  // n x d_struct
};

SplitReps split_reps(const SentenceReps& reps);

EdgeScores score_edges(const Matrix& d_vecs, const ScorerParams& params);

struct ScorerGradients {
  Matrix d_fp, d_fc, d_wa, d_fr;
  Matrix d_vecs;  // n x d_struct
};

// Upstream holds d loss / d f (n x n, diagonal included) and d loss / d r.
ScorerGradients score_backward(const Matrix& d_vecs, const ScorerParams& params,
                               const Matrix& upstream_f,
                               const std::vector<double>& upstream_r);

}  // namespace structsum
