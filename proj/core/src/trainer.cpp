#include "structsum/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "structsum/error.hpp"
#include "structsum/fusion.hpp"
#include "structsum/rng.hpp"

namespace structsum {

void TrainConfig::validate() const {
  if (n_docs < 1 || n_sentences < 1 || d_struct < 1)
    throw validation_error("TrainConfig: counts and widths must be >= 1");
  if (d_struct < 2 * n_sentences)
    throw validation_error("TrainConfig: d_struct must fit two indicator blocks (>= 2 * n_sentences)");
  if (lr <= 0.0) throw validation_error("TrainConfig: lr must be > 0");
  if (noise_sigma < 0.0) throw validation_error("TrainConfig: noise_sigma must be >= 0");
}

namespace {

Arborescence random_arborescence(std::size_t n, Rng& rng) {
  // Attach each node to a uniformly chosen already-attached node, then relabel.
  std::vector<std::size_t> order_parent(n, kNoParent);
  for (std::size_t k = 1; k < n; ++k) order_parent[k] = rng.below(k);
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  for (std::size_t k = n; k-- > 1;) std::swap(label[k], label[rng.below(k + 1)]);

  Arborescence t;
  t.n = n;
  t.root = label[0];
  t.parent.assign(n, kNoParent);
  for (std::size_t k = 1; k < n; ++k) t.parent[label[k]] = label[order_parent[k]];
  return t;
}

}  // namespace

std::vector<SyntheticDoc> generate_corpus(const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<SyntheticDoc> corpus;
  corpus.reserve(cfg.n_docs);
  const std::size_t n = cfg.n_sentences;
  for (std::size_t d = 0; d < cfg.n_docs; ++d) {
    SyntheticDoc doc;
    doc.gold = random_arborescence(n, rng);
    doc.features = Matrix(n, cfg.d_struct);
    for (std::size_t v = 0; v < n; ++v) {
      doc.features(v, v) = 1.0;  // identity block
      if (doc.gold.parent[v] != kNoParent)
        doc.features(v, n + doc.gold.parent[v]) = 1.0;  // parent block, zero for root
    }
    if (cfg.noise_sigma > 0.0)
      for (double& x : doc.features.data()) x += rng.normal(0.0, cfg.noise_sigma);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

TreeNll tree_nll_and_grad(const EdgeScores& scores, const Arborescence& gold) {
  if (scores.n != gold.n) throw validation_error("tree_nll_and_grad: size mismatch");
  gold.validate();
  const TreeMarginals m = marginals(scores);

  TreeNll out;
  out.loss = m.log_z - gold.total_score(scores);
  out.d_f = m.a;
  out.d_r = m.a_root;
  for (std::size_t j = 0; j < scores.n; ++j) {
    if (gold.parent[j] == kNoParent)
      out.d_r[j] -= 1.0;
    else
      out.d_f(gold.parent[j], j) -= 1.0;
  }
  return out;
}

void adagrad_step(Matrix& theta, const Matrix& grad, Matrix& acc, double lr) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols() ||
      theta.rows() != acc.rows() || theta.cols() != acc.cols())
    throw validation_error("adagrad_step: shape mismatch");
  for (std::size_t i = 0; i < theta.data().size(); ++i) {
    const double g = grad.data()[i];
    acc.data()[i] += g * g;
    theta.data()[i] -= lr * g / (std::sqrt(acc.data()[i]) + kAdagradEps);
  }
}

void adagrad_step(std::vector<double>& theta, const std::vector<double>& grad,
                  std::vector<double>& acc, double lr) {
  if (theta.size() != grad.size() || theta.size() != acc.size())
    throw validation_error("adagrad_step: shape mismatch");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    acc[i] += g * g;
    theta[i] -= lr * g / (std::sqrt(acc[i]) + kAdagradEps);
  }
}

double uas(const std::vector<Arborescence>& predicted,
           const std::vector<Arborescence>& gold) {
  if (predicted.size() != gold.size()) throw validation_error("uas: corpus size mismatch");
  std::size_t correct = 0, total = 0;
  for (std::size_t d = 0; d < predicted.size(); ++d) {
    if (predicted[d].n != gold[d].n) throw validation_error("uas: tree size mismatch");
    for (std::size_t j = 0; j < gold[d].n; ++j) {
      ++total;
      if (predicted[d].parent[j] == gold[d].parent[j]) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

double frob_sq(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

void scale(Matrix& m, double s) {
  for (double& v : m.data()) v *= s;
}

double corpus_uas(const std::vector<SyntheticDoc>& corpus, const ScorerParams& params) {
  std::vector<Arborescence> pred, gold;
  pred.reserve(corpus.size());
  gold.reserve(corpus.size());
  for (const SyntheticDoc& doc : corpus) {
    pred.push_back(cle_decode(score_edges(doc.features, params)));
    gold.push_back(doc.gold);
  }
  return uas(pred, gold);
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<SyntheticDoc> corpus = generate_corpus(cfg);
  const std::size_t d_proj = cfg.d_struct;

  TrainResult result;
  result.params = ScorerParams::init(cfg.d_struct, d_proj, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  result.initial_uas = corpus_uas(corpus, result.params);

  Matrix acc_fp(d_proj, cfg.d_struct, cfg.accumulator_init);
  Matrix acc_fc(d_proj, cfg.d_struct, cfg.accumulator_init);
  Matrix acc_wa(d_proj, d_proj, cfg.accumulator_init);
  Matrix acc_fr(1, cfg.d_struct, cfg.accumulator_init);

  const double inv_docs = 1.0 / static_cast<double>(cfg.n_docs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Matrix g_fp(d_proj, cfg.d_struct), g_fc(d_proj, cfg.d_struct);
    Matrix g_wa(d_proj, d_proj), g_fr(1, cfg.d_struct);
    double loss_sum = 0.0;

    for (const SyntheticDoc& doc : corpus) {
      const EdgeScores scores = score_edges(doc.features, result.params);
      const TreeNll nll = tree_nll_and_grad(scores, doc.gold);
      loss_sum += nll.loss;
      const ScorerGradients sg =
          score_backward(doc.features, result.params, nll.d_f, nll.d_r);
      for (std::size_t i = 0; i < g_fp.data().size(); ++i)
        g_fp.data()[i] += sg.d_fp.data()[i] * inv_docs;
      for (std::size_t i = 0; i < g_fc.data().size(); ++i)
        g_fc.data()[i] += sg.d_fc.data()[i] * inv_docs;
      for (std::size_t i = 0; i < g_wa.data().size(); ++i)
        g_wa.data()[i] += sg.d_wa.data()[i] * inv_docs;
      for (std::size_t i = 0; i < g_fr.data().size(); ++i)
        g_fr.data()[i] += sg.d_fr.data()[i] * inv_docs;
    }

    const double mean_loss = loss_sum * inv_docs;
    if (!std::isfinite(mean_loss))
      throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch));
    result.loss_trace.push_back(mean_loss);

    // Gradient clipping at global norm 2.
    const double norm =
        std::sqrt(frob_sq(g_fp) + frob_sq(g_fc) + frob_sq(g_wa) + frob_sq(g_fr));
    if (norm > 2.0) {
      const double s = 2.0 / norm;
      scale(g_fp, s);
      scale(g_fc, s);
      scale(g_wa, s);
      scale(g_fr, s);
    }

    adagrad_step(result.params.fp, g_fp, acc_fp, cfg.lr);
    adagrad_step(result.params.fc, g_fc, acc_fc, cfg.lr);
    adagrad_step(result.params.wa, g_wa, acc_wa, cfg.lr);
    adagrad_step(result.params.fr, g_fr, acc_fr, cfg.lr);
  }

  result.final_uas = corpus_uas(corpus, result.params);
  return result;
}

GradCheckComponent parse_component(const std::string& name) {
  if (name == "mtt") return GradCheckComponent::kMatrixTree;
  if (name == "scorer") return GradCheckComponent::kScorer;
  if (name == "fusion") return GradCheckComponent::kFusion;
  if (name == "fusion-literal-c") return GradCheckComponent::kFusionLiteralC;
  if (name == "loss") return GradCheckComponent::kLoss;
  throw validation_error("unknown gradient-check component: " + name);
}

namespace {

constexpr double kFdStep = 1e-5;

struct CheckAccum {
  double max_rel_err = 0.0;
  std::size_t coords = 0;

  void add(double analytic, double fd) {
    const double denom = std::max({std::fabs(analytic), std::fabs(fd), 1e-6});
    max_rel_err = std::max(max_rel_err, std::fabs(analytic - fd) / denom);
    ++coords;
  }
};

// Central difference through an arbitrary coordinate of a mutable copy.
template <typename Eval>
double central_diff(double& coord, Eval&& eval) {
  const double keep = coord;
  coord = keep + kFdStep;
  const double up = eval();
  coord = keep - kFdStep;
  const double down = eval();
  coord = keep;
  return (up - down) / (2.0 * kFdStep);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

void check_mtt(std::uint64_t seed, double analytic_scale, CheckAccum& acc) {
  Rng rng(seed);
  const std::size_t n = 2 + seed % 4;
  EdgeScores scores;
  scores.n = n;
  scores.f = random_matrix(n, n, rng, -2.0, 2.0);
  scores.r.resize(n);
  for (double& v : scores.r) v = rng.uniform(-2.0, 2.0);

  MarginalsUpstream up;
  up.d_a = random_matrix(n, n, rng, -1.0, 1.0);
  up.d_a_root.resize(n);
  for (double& v : up.d_a_root) v = rng.uniform(-1.0, 1.0);
  up.d_log_z = rng.uniform(-1.0, 1.0);

  const auto eval = [&](const EdgeScores& s) {
    const TreeMarginals m = marginals(s);
    double loss = up.d_log_z * m.log_z;
    for (std::size_t i = 0; i < n; ++i) {
      loss += up.d_a_root[i] * m.a_root[i];
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) loss += up.d_a(i, j) * m.a(i, j);
    }
    return loss;
  };

  const ScoreGradients grads = grad_scores(scores, up);
  EdgeScores probe = scores;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double fd = central_diff(probe.f(i, j), [&] { return eval(probe); });
      acc.add(analytic_scale * grads.d_f(i, j), fd);
    }
    const double fd = central_diff(probe.r[i], [&] { return eval(probe); });
    acc.add(analytic_scale * grads.d_r[i], fd);
  }
}

void check_scorer(std::uint64_t seed, double analytic_scale, CheckAccum& acc) {
  Rng rng(seed);
  const std::size_t n = 2 + seed % 4;
  const std::size_t d_struct = 2 + seed % 5;
  const std::size_t d_proj = 2 + (seed / 3) % 4;
  ScorerParams params = ScorerParams::init(d_struct, d_proj, seed * 31 + 7);
  const Matrix d_vecs = random_matrix(n, d_struct, rng, -1.0, 1.0);
  const Matrix up_f = random_matrix(n, n, rng, -1.0, 1.0);
  std::vector<double> up_r(n);
  for (double& v : up_r) v = rng.uniform(-1.0, 1.0);

  const auto eval = [&](const Matrix& vecs, const ScorerParams& p) {
    const EdgeScores s = score_edges(vecs, p);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss += up_r[i] * s.r[i];
      for (std::size_t j = 0; j < n; ++j) loss += up_f(i, j) * s.f(i, j);
    }
    return loss;
  };

  const ScorerGradients grads = score_backward(d_vecs, params, up_f, up_r);
  Matrix probe_vecs = d_vecs;
  ScorerParams probe = params;
  const auto run = [&] { return eval(probe_vecs, probe); };

  for (std::size_t i = 0; i < probe.fp.data().size(); ++i)
    acc.add(analytic_scale * grads.d_fp.data()[i], central_diff(probe.fp.data()[i], run));
  for (std::size_t i = 0; i < probe.fc.data().size(); ++i)
    acc.add(analytic_scale * grads.d_fc.data()[i], central_diff(probe.fc.data()[i], run));
  for (std::size_t i = 0; i < probe.wa.data().size(); ++i)
    acc.add(analytic_scale * grads.d_wa.data()[i], central_diff(probe.wa.data()[i], run));
  for (std::size_t i = 0; i < probe.fr.data().size(); ++i)
    acc.add(analytic_scale * grads.d_fr.data()[i], central_diff(probe.fr.data()[i], run));
  for (std::size_t i = 0; i < probe_vecs.data().size(); ++i)
    acc.add(analytic_scale * grads.d_vecs.data()[i],
            central_diff(probe_vecs.data()[i], run));
}

void check_fusion(std::uint64_t seed, double analytic_scale, ChildContextMode mode,
                  CheckAccum& acc) {
  Rng rng(seed);
  const std::size_t n = 2 + seed % 3;
  const std::size_t d_sem = 2 + seed % 2;
  const std::size_t d_h = 2 + (seed / 2) % 3;
  const std::size_t d_u = 2;
  const std::size_t d_e = 2 + (seed / 5) % 2;
  FusionParams params = FusionParams::init(d_sem, d_h, d_u, d_e, seed * 17 + 3);

  EdgeScores scores;
  scores.n = n;
  scores.f = random_matrix(n, n, rng, -1.0, 1.0);
  scores.r.resize(n);
  for (double& v : scores.r) v = rng.uniform(-1.0, 1.0);
  const TreeMarginals marg = marginals(scores);

  const Matrix g = random_matrix(n, d_sem, rng, -1.0, 1.0);
  const Matrix h = random_matrix(n, d_h, rng, -1.0, 1.0);
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) row += (k(i, j) = rng.uniform(0.1, 1.0));
    for (std::size_t j = 0; j < n; ++j) k(i, j) /= row;
  }
  const Matrix up_l = random_matrix(n, d_sem, rng, -1.0, 1.0);
  const Matrix up_e = random_matrix(n, d_e, rng, -1.0, 1.0);

  const auto eval = [&](const Matrix& gg, const Matrix& hh, const FusionParams& p) {
    const LatentFusion lf = latent_fuse(gg, marg, p, mode);
    const ExplicitFusion ef = explicit_fuse(hh, k, p);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t kk = 0; kk < d_sem; ++kk) loss += up_l(i, kk) * lf.l(i, kk);
      for (std::size_t kk = 0; kk < d_e; ++kk) loss += up_e(i, kk) * ef.e(i, kk);
    }
    return loss;
  };

  const FusionGradients grads = fusion_backward(g, marg, h, k, params, up_l, up_e, mode);
  Matrix probe_g = g, probe_h = h;
  FusionParams probe = params;
  const auto run = [&] { return eval(probe_g, probe_h, probe); };

  for (std::size_t i = 0; i < probe_g.data().size(); ++i)
    acc.add(analytic_scale * grads.d_g.data()[i], central_diff(probe_g.data()[i], run));
  for (std::size_t i = 0; i < probe_h.data().size(); ++i)
    acc.add(analytic_scale * grads.d_h.data()[i], central_diff(probe_h.data()[i], run));
  for (std::size_t i = 0; i < probe.wr.data().size(); ++i)
    acc.add(analytic_scale * grads.d_wr.data()[i], central_diff(probe.wr.data()[i], run));
  for (std::size_t i = 0; i < probe.g_root.size(); ++i)
    acc.add(analytic_scale * grads.d_g_root[i], central_diff(probe.g_root[i], run));
  for (std::size_t i = 0; i < probe.fu.data().size(); ++i)
    acc.add(analytic_scale * grads.d_fu.data()[i], central_diff(probe.fu.data()[i], run));
  for (std::size_t i = 0; i < probe.fe.data().size(); ++i)
    acc.add(analytic_scale * grads.d_fe.data()[i], central_diff(probe.fe.data()[i], run));
}

void check_loss(std::uint64_t seed, double analytic_scale, CheckAccum& acc) {
  Rng rng(seed);
  const std::size_t n = 2 + seed % 4;
  EdgeScores scores;
  scores.n = n;
  scores.f = random_matrix(n, n, rng, -2.0, 2.0);
  scores.r.resize(n);
  for (double& v : scores.r) v = rng.uniform(-2.0, 2.0);
  const Arborescence gold = random_arborescence(n, rng);

  const TreeNll nll = tree_nll_and_grad(scores, gold);
  EdgeScores probe = scores;
  const auto run = [&] { return tree_nll_and_grad(probe, gold).loss; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      acc.add(analytic_scale * nll.d_f(i, j), central_diff(probe.f(i, j), run));
    }
    acc.add(analytic_scale * nll.d_r[i], central_diff(probe.r[i], run));
  }
}

}  // namespace

GradCheckReport gradient_check(GradCheckComponent component, std::uint64_t seed,
                               double tol, double analytic_scale) {
  if (tol <= 0.0) throw validation_error("gradient_check: tol must be > 0");
  CheckAccum acc;
  GradCheckReport report;
  report.tol = tol;
  switch (component) {
    case GradCheckComponent::kMatrixTree:
      report.component = "mtt";
      check_mtt(seed, analytic_scale, acc);
      break;
    case GradCheckComponent::kScorer:
      report.component = "scorer";
      check_scorer(seed, analytic_scale, acc);
      break;
    case GradCheckComponent::kFusion:
      report.component = "fusion";
      check_fusion(seed, analytic_scale, ChildContextMode::kChildVectors, acc);
      break;
    case GradCheckComponent::kFusionLiteralC:
      report.component = "fusion-literal-c";
      check_fusion(seed, analytic_scale, ChildContextMode::kSelfScaled, acc);
      break;
    case GradCheckComponent::kLoss:
      report.component = "loss";
      check_loss(seed, analytic_scale, acc);
      break;
  }
  report.coords_checked = acc.coords;
  report.max_rel_err = acc.max_rel_err;
  report.pass = acc.max_rel_err <= tol;
  return report;
}

}  // namespace structsum
