#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "structsum/matrix.hpp"
#include "structsum/scorer.hpp"
#include "structsum/tree.hpp"

namespace structsum {

// Synthetic planted-tree probe task for the latent-structure attention:
// features carry node and parent identity, the trainer must recover the tree.
struct TrainConfig {
  std::size_t n_docs = 200;
  std::size_t n_sentences = 8;
  std::size_t d_struct = 32;  // must hold two indicator blocks: >= 2 * n_sentences
  double noise_sigma = 0.1;
  double lr = 0.15;
  double accumulator_init = 0.1;
  std::size_t epochs = 300;
  std::uint64_t seed = 17;

  void validate() const;
};

struct SyntheticDoc {
  Arborescence gold;
  Matrix features;  // n_sentences x d_struct
};

std::vector<SyntheticDoc> generate_corpus(const TrainConfig& cfg);

struct TreeNll {
  double loss = 0.0;
  Matrix d_f;
  std::vector<double> d_r;
};

// loss = -log P(gold tree) under the matrix-tree distribution;
// d_f(i,j) = a(i,j) - [edge in gold], d_r(i) = a_root(i) - [i is root].
TreeNll tree_nll_and_grad(const EdgeScores& scores, const Arborescence& gold);

inline constexpr double kAdagradEps = 1e-10;

// acc += g^2; theta -= lr * g / (sqrt(acc) + eps), element-wise.
void adagrad_step(Matrix& theta, const Matrix& grad, Matrix& acc, double lr);
void adagrad_step(std::vector<double>& theta, const std::vector<double>& grad,
                  std::vector<double>& acc, double lr);

double uas(const std::vector<Arborescence>& predicted,
           const std::vector<Arborescence>& gold);

struct TrainResult {
  ScorerParams params;
  std::vector<double> loss_trace;  // mean loss per epoch
  double initial_uas = 0.0;
  double final_uas = 0.0;
};

// Full-batch Adagrad over the synthetic corpus with gradient clipping at
// global norm 2. Deterministic given cfg.seed. Throws numeric_error if the
// loss goes non-finite.
TrainResult train(const TrainConfig& cfg);

enum class GradCheckComponent { kMatrixTree, kScorer, kFusion, kFusionLiteralC, kLoss };

GradCheckComponent parse_component(const std::string& name);

struct GradCheckReport {
  std::string component;
  std::size_t coords_checked = 0;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Central finite differences (h = 1e-5) against the analytic backward pass
// at a seeded random point. analytic_scale exists for fault-injection tests.
GradCheckReport gradient_check(GradCheckComponent component, std::uint64_t seed,
                               double tol, double analytic_scale = 1.0);

}  // namespace structsum
