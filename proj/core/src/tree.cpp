#include "structsum/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "structsum/error.hpp"

namespace structsum {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void EdgeScores::validate() const {
  if (n < 1) throw validation_error("EdgeScores: n must be >= 1");
  if (f.rows() != n || f.cols() != n || r.size() != n)
    throw validation_error("EdgeScores: shape mismatch");
  if (!f.all_finite()) throw validation_error("EdgeScores: non-finite edge score");
  for (double v : r)
    if (!std::isfinite(v)) throw validation_error("EdgeScores: non-finite root score");
}

void Arborescence::validate() const {
  if (n < 1 || parent.size() != n) throw validation_error("Arborescence: bad size");
  if (root >= n || parent[root] != kNoParent)
    throw validation_error("Arborescence: root has a parent");
  std::size_t roots = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (parent[j] == kNoParent) {
      ++roots;
    } else if (parent[j] >= n || parent[j] == j) {
      throw validation_error("Arborescence: invalid parent index");
    }
  }
  if (roots != 1) throw validation_error("Arborescence: must have exactly one root");
  // Every node must reach the root through parent links without revisiting.
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t cur = j, steps = 0;
    while (cur != root) {
      cur = parent[cur];
      if (++steps > n) throw validation_error("Arborescence: cycle in parent links");
    }
  }
}

double Arborescence::total_score(const EdgeScores& scores) const {
  double total = scores.r[root];
  for (std::size_t j = 0; j < n; ++j)
    if (parent[j] != kNoParent) total += scores.f(parent[j], j);
  return total;
}

std::size_t Arborescence::depth() const {
  std::vector<std::size_t> d(n, 0);
  d[root] = 1;
  // Parent depths resolve in at most n sweeps; trees are tiny.
  for (std::size_t pass = 0; pass < n; ++pass)
    for (std::size_t j = 0; j < n; ++j)
      if (parent[j] != kNoParent && d[parent[j]] > 0) d[j] = d[parent[j]] + 1;
  return *std::max_element(d.begin(), d.end());
}

double Arborescence::leaf_proportion() const {
  std::vector<bool> has_child(n, false);
  for (std::size_t j = 0; j < n; ++j)
    if (parent[j] != kNoParent) has_child[parent[j]] = true;
  std::size_t leaves = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_child[i]) ++leaves;
  return static_cast<double>(leaves) / static_cast<double>(n);
}

LaplacianResult build_laplacian(const EdgeScores& scores) {
  scores.validate();
  const std::size_t n = scores.n;
  double shift = kNegInf;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) shift = std::max(shift, scores.f(i, j));
  for (double v : scores.r) shift = std::max(shift, v);

  LaplacianResult out;
  out.shift = shift;
  out.weights = Matrix(n, n);
  out.root_w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.weights(i, j) = std::exp(scores.f(i, j) - shift);
    out.root_w[i] = std::exp(scores.r[i] - shift);
  }

  Matrix lap(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double colsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) colsum += out.weights(i, j);
    lap(j, j) = colsum;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) lap(i, j) = -out.weights(i, j);
  }
  for (std::size_t j = 0; j < n; ++j) lap(0, j) = out.root_w[j];
  out.laplacian = std::move(lap);
  return out;
}

TreeMarginals marginals(const EdgeScores& scores) {
  const LaplacianResult lr = build_laplacian(scores);
  const std::size_t n = scores.n;

  const auto [sign, logmag] = log_abs_det(lr.laplacian);
  if (sign <= 0)
    throw numeric_error("marginals: root-adjusted Laplacian is singular or has non-positive determinant");
  Matrix inv;
  try {
    inv = invert(lr.laplacian);
  } catch (const numeric_error&) {
    throw numeric_error("marginals: root-adjusted Laplacian is numerically singular");
  }

  TreeMarginals tm;
  tm.n = n;
  tm.log_z = logmag + static_cast<double>(n) * lr.shift;
  tm.a = Matrix(n, n);
  tm.a_root.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    tm.a_root[j] = std::clamp(lr.root_w[j] * inv(j, 0), 0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double m = lr.weights(i, j) *
                       ((j != 0 ? inv(j, j) : 0.0) - (i != 0 ? inv(j, i) : 0.0));
      tm.a(i, j) = std::clamp(m, 0.0, 1.0);
    }
  }
  return tm;
}

namespace {

// Visits every valid arborescence over n nodes by stepping a mixed-radix
// parent assignment: digit j in [0, n] encodes "root" (n) or parent i,
// skipping i == j.
template <typename Fn>
void for_each_arborescence(std::size_t n, Fn&& fn) {
  std::vector<std::size_t> choice(n, 0);  // value n means root
  choice[0] = (n == 1) ? n : 1;           // digit j never equals j
  Arborescence t;
  t.n = n;
  t.parent.assign(n, kNoParent);
  for (;;) {
    std::size_t roots = 0, root = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (choice[j] == n) {
        ++roots;
        root = j;
        t.parent[j] = kNoParent;
      } else {
        t.parent[j] = choice[j];
      }
    }
    bool ok = (roots == 1);
    if (ok) {
      for (std::size_t j = 0; j < n && ok; ++j) {
        std::size_t cur = j, steps = 0;
        while (cur != root && steps <= n) {
          cur = t.parent[cur];
          ++steps;
        }
        ok = (cur == root);
      }
    }
    if (ok) {
      t.root = root;
      fn(t);
    }
    // increment mixed-radix counter, skipping self-parent digits
    std::size_t j = 0;
    for (; j < n; ++j) {
      ++choice[j];
      if (choice[j] == j) ++choice[j];
      if (choice[j] <= n) break;
      choice[j] = (j == 0) ? 1 : 0;
      if (choice[j] == j) ++choice[j];
    }
    if (j == n) return;
  }
}

}  // namespace

TreeMarginals enumerate_marginals(const EdgeScores& scores) {
  scores.validate();
  const std::size_t n = scores.n;
  if (n > 8) throw validation_error("enumerate_marginals: n > 8 not supported");

  double max_score = kNegInf;
  for_each_arborescence(n, [&](const Arborescence& t) {
    max_score = std::max(max_score, t.total_score(scores));
  });

  TreeMarginals tm;
  tm.n = n;
  tm.a = Matrix(n, n);
  tm.a_root.assign(n, 0.0);
  double z = 0.0;
  for_each_arborescence(n, [&](const Arborescence& t) {
    const double w = std::exp(t.total_score(scores) - max_score);
    z += w;
    tm.a_root[t.root] += w;
    for (std::size_t j = 0; j < n; ++j)
      if (t.parent[j] != kNoParent) tm.a(t.parent[j], j) += w;
  });
  for (std::size_t j = 0; j < n; ++j) {
    tm.a_root[j] /= z;
    for (std::size_t i = 0; i < n; ++i) tm.a(i, j) /= z;
  }
  tm.log_z = max_score + std::log(z);
  return tm;
}

ScoreGradients grad_scores(const EdgeScores& scores, const MarginalsUpstream& upstream) {
  const LaplacianResult lr = build_laplacian(scores);
  const std::size_t n = scores.n;
  Matrix inv;
  try {
    inv = invert(lr.laplacian);
  } catch (const numeric_error&) {
    throw numeric_error("grad_scores: root-adjusted Laplacian is numerically singular");
  }

  const bool has_da = upstream.d_a.rows() == n && upstream.d_a.cols() == n;
  const bool has_droot = upstream.d_a_root.size() == n;

  // Direct terms into the stabilized weights and adjoint of the inverse.
  Matrix g_weights(n, n);
  std::vector<double> g_root_w(n, 0.0);
  Matrix g_inv(n, n);

  if (has_droot) {
    for (std::size_t j = 0; j < n; ++j) {
      g_root_w[j] += upstream.d_a_root[j] * inv(j, 0);
      g_inv(j, 0) += upstream.d_a_root[j] * lr.root_w[j];
    }
  }
  if (has_da) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double u = upstream.d_a(i, j);
        if (u == 0.0) continue;
        g_weights(i, j) += u * ((j != 0 ? inv(j, j) : 0.0) - (i != 0 ? inv(j, i) : 0.0));
        if (j != 0) g_inv(j, j) += u * lr.weights(i, j);
        if (i != 0) g_inv(j, i) -= u * lr.weights(i, j);
      }
    }
  }

  // d logdet / dL = inv^T; dB = -B dL B  =>  gL -= B^T gB B^T.
  Matrix g_lap(n, n);
  if (upstream.d_log_z != 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g_lap(i, j) += upstream.d_log_z * inv(j, i);
  }
  const Matrix inv_t = inv.transposed();
  const Matrix corr = matmul(matmul(inv_t, g_inv), inv_t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g_lap(i, j) -= corr(i, j);

  // Laplacian structure: row 0 holds root weights; elsewhere column sums on
  // the diagonal and negated weights off it.
  for (std::size_t j = 0; j < n; ++j) g_root_w[j] += g_lap(0, j);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double g = 0.0;
      if (i != 0) g -= g_lap(i, j);
      if (j != 0) g += g_lap(j, j);
      g_weights(i, j) += g;
    }
  }

  ScoreGradients out;
  out.d_f = Matrix(n, n);
  out.d_r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.d_f(i, j) = g_weights(i, j) * lr.weights(i, j);
    out.d_r[i] = g_root_w[i] * lr.root_w[i];
  }
  return out;
}

namespace {

struct EdgeArg {
  std::size_t from = kNoParent;
  std::size_t to = kNoParent;
};

// Recursive cycle-contracting maximum arborescence for a fixed root.
// w(i,j) = weight of edge i -> j, kNegInf for forbidden edges.
std::vector<std::size_t> cle_fixed_root(
    const std::vector<std::vector<double>>& w, std::size_t root) {
  const std::size_t n = w.size();
  std::vector<std::size_t> parent(n, kNoParent);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == root) continue;
    double best = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (w[i][j] > best) {
        best = w[i][j];
        parent[j] = i;
      }
    }
  }

  // Look for a cycle among the greedy picks.
  std::vector<int> color(n, 0);
  std::vector<std::size_t> cycle;
  for (std::size_t start = 0; start < n && cycle.empty(); ++start) {
    if (color[start] != 0) continue;
    std::size_t cur = start;
    std::vector<std::size_t> path;
    while (cur != kNoParent && color[cur] == 0) {
      color[cur] = 1;
      path.push_back(cur);
      cur = parent[cur];
    }
    if (cur != kNoParent && color[cur] == 1) {
      auto it = std::find(path.begin(), path.end(), cur);
      cycle.assign(it, path.end());
    }
    for (std::size_t v : path) color[v] = 2;
  }
  if (cycle.empty()) return parent;

  std::vector<bool> in_cycle(n, false);
  for (std::size_t v : cycle) in_cycle[v] = true;
  double cycle_score = 0.0;
  for (std::size_t v : cycle) cycle_score += w[parent[v]][v];

  // Contract the cycle into one supernode.
  std::vector<std::size_t> new_id(n, kNoParent);
  std::size_t m = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (!in_cycle[v]) new_id[v] = m++;
  const std::size_t cyc_id = m++;
  for (std::size_t v : cycle) new_id[v] = cyc_id;

  std::vector<std::vector<double>> w2(m, std::vector<double>(m, kNegInf));
  std::vector<std::vector<EdgeArg>> arg(m, std::vector<EdgeArg>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || w[i][j] == kNegInf) continue;
      const std::size_t a = new_id[i], b = new_id[j];
      if (a == b) continue;
      // Entering the cycle swaps out the cycle edge currently feeding j.
      const double val = in_cycle[j] ? w[i][j] + cycle_score - w[parent[j]][j] : w[i][j];
      if (val > w2[a][b]) {
        w2[a][b] = val;
        arg[a][b] = EdgeArg{i, j};
      }
    }
  }

  const std::vector<std::size_t> parent2 = cle_fixed_root(w2, new_id[root]);

  std::vector<std::size_t> result(n, kNoParent);
  for (std::size_t v : cycle) result[v] = parent[v];  // cycle edges, one broken below
  for (std::size_t b = 0; b < m; ++b) {
    const std::size_t a = parent2[b];
    if (a == kNoParent) continue;
    const EdgeArg& e = arg[a][b];
    result[e.to] = e.from;
  }
  return result;
}

// Tree-ordering key used by both decoders: higher total score first, then
// lexicographically lower parents (root slot compares lowest), then lower root.
bool tree_better(double score_a, const Arborescence& a,
                 double score_b, const Arborescence& b) {
  if (score_a != score_b) return score_a > score_b;
  for (std::size_t j = 0; j < a.n; ++j) {
    const auto pa = a.parent[j] == kNoParent ? -1 : static_cast<long long>(a.parent[j]);
    const auto pb = b.parent[j] == kNoParent ? -1 : static_cast<long long>(b.parent[j]);
    if (pa != pb) return pa < pb;
  }
  return a.root < b.root;
}

}  // namespace

Arborescence cle_decode(const EdgeScores& scores) {
  scores.validate();
  const std::size_t n = scores.n;
  Arborescence best;
  double best_score = kNegInf;
  bool have = false;

  std::vector<std::vector<double>> w(n, std::vector<double>(n, kNegInf));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) w[i][j] = scores.f(i, j);

  for (std::size_t root = 0; root < n; ++root) {
    auto wr = w;
    for (std::size_t i = 0; i < n; ++i) wr[i][root] = kNegInf;
    Arborescence t;
    t.n = n;
    t.root = root;
    t.parent = cle_fixed_root(wr, root);
    const double s = t.total_score(scores);
    if (!have || tree_better(s, t, best_score, best)) {
      best = t;
      best_score = s;
      have = true;
    }
  }
  return best;
}

Arborescence best_tree_bruteforce(const EdgeScores& scores) {
  scores.validate();
  if (scores.n > 7) throw validation_error("best_tree_bruteforce: n > 7 not supported");
  Arborescence best;
  double best_score = kNegInf;
  bool have = false;
  for_each_arborescence(scores.n, [&](const Arborescence& t) {
    const double s = t.total_score(scores);
    if (!have || tree_better(s, t, best_score, best)) {
      best = t;
      best_score = s;
      have = true;
    }
  });
  return best;
}

}  // namespace structsum
