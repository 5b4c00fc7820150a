#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "structsum/matrix.hpp"

namespace structsum {

// Unnormalized scores over directed sentence edges. f(i,j) scores the edge
// parent i -> child j; the diagonal is carried but ignored by every consumer.
struct EdgeScores {
  std::size_t n = 0;
  Matrix f;                // n x n
  std::vector<double> r;   // length n, root scores

  static EdgeScores zeros(std::size_t n) {
    return EdgeScores{n, Matrix(n, n), std::vector<double>(n, 0.0)};
  }
  void validate() const;
};

struct TreeMarginals {
  std::size_t n = 0;
  Matrix a;                     // a(i,j) = P(edge i -> j)
  std::vector<double> a_root;   // a_root[i] = P(i is root)
  double log_z = 0.0;
};

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

// Rooted directed spanning tree given as a parent assignment.
struct Arborescence {
  std::size_t n = 0;
  std::size_t root = 0;
  std::vector<std::size_t> parent;  // parent[root] == kNoParent

  void validate() const;  // throws validation_error on structural violations
  double total_score(const EdgeScores& scores) const;
  std::size_t depth() const;           // nodes on the longest root-to-leaf path
  double leaf_proportion() const;
};

// Root-adjusted Laplacian over stabilized weights exp(score - shift), where
// shift is the max over all off-diagonal f and all r entries. The true
// log-partition is log det(L) + n * shift.
struct LaplacianResult {
  Matrix laplacian;
  Matrix weights;              // A(i,j) = exp(f(i,j) - shift), zero diagonal
  std::vector<double> root_w;  // exp(r[i] - shift)
  double shift = 0.0;
};

LaplacianResult build_laplacian(const EdgeScores& scores);

// Edge and root marginals by the matrix-tree identity. Throws numeric_error
// if the stabilized Laplacian is singular.
TreeMarginals marginals(const EdgeScores& scores);

// Exact marginals by enumerating all n^(n-1) arborescences. n <= 8.
TreeMarginals enumerate_marginals(const EdgeScores& scores);

struct MarginalsUpstream {
  Matrix d_a;                    // same shape as a; empty means all-zero
  std::vector<double> d_a_root;  // empty means all-zero
  double d_log_z = 0.0;
};

struct ScoreGradients {
  Matrix d_f;
  std::vector<double> d_r;
};

// Backward pass through the matrix-tree layer. When the upstream selects
// log_z with weight 1, the result equals the marginals.
ScoreGradients grad_scores(const EdgeScores& scores, const MarginalsUpstream& upstream);

// Maximum spanning arborescence (Chu-Liu-Edmonds), run once per candidate
// root; ties prefer the lower parent index, then the lower root index.
Arborescence cle_decode(const EdgeScores& scores);

// Exact argmax by enumeration, same tie-breaking. n <= 7.
Arborescence best_tree_bruteforce(const EdgeScores& scores);

}  // namespace structsum
