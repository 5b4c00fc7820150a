#pragma once

#include <cstdint>
#include <vector>

#include "structsum/matrix.hpp"
#include "structsum/tree.hpp"

namespace structsum {

// How the child context c_i is gathered from the edge marginals. The mixed
// mode sums marginal-weighted child vectors; the literal mode scales g_i by
// the node's total outgoing mass instead.
enum class ChildContextMode { kChildVectors, kSelfScaled };

struct FusionParams {
  std::size_t d_sem = 0;
  std::size_t d_h = 0;
  std::size_t d_u = 0;
  std::size_t d_e = 0;
  Matrix wr;                   // d_sem x 3*d_sem
  std::vector<double> g_root;  // d_sem, learned root embedding
  Matrix fu;                   // d_u x d_h
  Matrix fe;                   // d_e x d_u

  static FusionParams init(std::size_t d_sem, std::size_t d_h, std::size_t d_u,
                           std::size_t d_e, std::uint64_t seed);
  void validate() const;
};

// Coordinate-wise max over each sentence's token vectors.
Matrix pool_sentences(const std::vector<Matrix>& token_vecs);

struct LatentFusion {
  Matrix p;  // n x d_sem, parent context
  Matrix c;  // n x d_sem, child context
  Matrix l;  // n x d_sem, tanh(Wr [g; p; c])
};

LatentFusion latent_fuse(const Matrix& g, const TreeMarginals& marg,
                         const FusionParams& params,
                         ChildContextMode mode = ChildContextMode::kChildVectors);

struct ExplicitFusion {
  Matrix u;  // n x d_u
  Matrix t;  // n x d_u, K-mixed
  Matrix e;  // n x d_e
};

ExplicitFusion explicit_fuse(const Matrix& h, const Matrix& k, const FusionParams& params);

struct FusedReps {
  Matrix l;
  Matrix e;
  Matrix h_sent;               // n x (d_sem + d_e), [l_i; e_i]
  std::vector<Matrix> h_tok;   // per sentence, tokens x (d_tok + d_sem + d_e)
};

FusedReps combine_and_augment(const Matrix& l, const Matrix& e,
                              const std::vector<Matrix>& token_vecs);

struct FusionGradients {
  Matrix d_g;
  Matrix d_h;
  Matrix d_wr;
  std::vector<double> d_g_root;
  Matrix d_fu;
  Matrix d_fe;
};

// Backward through both fusion paths; marginals and K are non-learned inputs.
// Upstream carries d loss / d l and d loss / d e.
FusionGradients fusion_backward(const Matrix& g, const TreeMarginals& marg,
                                const Matrix& h, const Matrix& k,
                                const FusionParams& params,
                                const Matrix& upstream_l, const Matrix& upstream_e,
                                ChildContextMode mode = ChildContextMode::kChildVectors);

}  // namespace structsum
