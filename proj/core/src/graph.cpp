#include "structsum/graph.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <string>

#include "structsum/error.hpp"

namespace structsum {

namespace {

std::string fold_case(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

void Document::validate() const {
  if (sentences.empty()) throw validation_error("document '" + id + "': no sentences");
  for (std::size_t c = 0; c < coref_clusters.size(); ++c) {
    for (const Mention& m : coref_clusters[c]) {
      if (m.sentence >= sentences.size())
        throw validation_error("document '" + id + "': cluster " + std::to_string(c) +
                               " mention sentence index " + std::to_string(m.sentence) +
                               " out of range");
      if (m.end < m.start || m.end > sentences[m.sentence].size())
        throw validation_error("document '" + id + "': cluster " + std::to_string(c) +
                               " mention span out of range in sentence " +
                               std::to_string(m.sentence));
    }
  }
  for (const Entity& e : entities) {
    if (e.sentence >= sentences.size())
      throw validation_error("document '" + id + "': entity sentence index " +
                             std::to_string(e.sentence) + " out of range");
    if (e.end < e.start || e.end > sentences[e.sentence].size())
      throw validation_error("document '" + id + "': entity span out of range in sentence " +
                             std::to_string(e.sentence));
  }
}

std::size_t SentenceGraph::edge_count() const {
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (counts[i][j] > 0) ++edges;
  return edges;
}

SentenceGraph build_coref_counts(const Document& doc) {
  doc.validate();
  SentenceGraph g = SentenceGraph::zeros(doc.n_sentences());
  for (const auto& cluster : doc.coref_clusters) {
    std::set<std::size_t> touched;
    for (const Mention& m : cluster) touched.insert(m.sentence);
    for (auto it = touched.begin(); it != touched.end(); ++it) {
      auto jt = it;
      for (++jt; jt != touched.end(); ++jt) {
        ++g.counts[*it][*jt];
        ++g.counts[*jt][*it];
      }
    }
  }
  return g;
}

SentenceGraph build_ner_counts(const Document& doc) {
  doc.validate();
  const std::size_t n = doc.n_sentences();
  std::vector<std::set<std::string>> surfaces(n);
  for (const Entity& e : doc.entities) surfaces[e.sentence].insert(fold_case(e.text));

  SentenceGraph g = SentenceGraph::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      long shared = 0;
      for (const std::string& s : surfaces[i])
        if (surfaces[j].count(s)) ++shared;
      g.counts[i][j] = g.counts[j][i] = shared;
    }
  }
  return g;
}

SentenceGraph merge_counts(const SentenceGraph& g1, const SentenceGraph& g2) {
  if (g1.n != g2.n) throw validation_error("merge_counts: size mismatch");
  SentenceGraph out = g1;
  for (std::size_t i = 0; i < out.n; ++i)
    for (std::size_t j = 0; j < out.n; ++j) out.counts[i][j] += g2.counts[i][j];
  return out;
}

AdjacencyK normalize_adjacency(const SentenceGraph& g, double epsilon) {
  if (g.n < 2)
    throw validation_error("normalize_adjacency: need at least two sentences");
  if (epsilon <= 0.0) throw validation_error("normalize_adjacency: epsilon must be > 0");

  AdjacencyK out;
  out.n = g.n;
  out.k = Matrix(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    double denom = 0.0;
    for (std::size_t v = 0; v < g.n; ++v)
      if (v != i) denom += static_cast<double>(g.counts[i][v]) + epsilon;
    for (std::size_t j = 0; j < g.n; ++j)
      if (j != i) out.k(i, j) = (static_cast<double>(g.counts[i][j]) + epsilon) / denom;
  }
  return out;
}

EdgeOverlap edge_precision_recall(const Arborescence& tree, const SentenceGraph& graph) {
  if (tree.n != graph.n) throw validation_error("edge_precision_recall: size mismatch");
  EdgeOverlap out;
  out.graph_edges = graph.edge_count();
  for (std::size_t j = 0; j < tree.n; ++j) {
    if (tree.parent[j] == kNoParent) continue;
    ++out.tree_edges;
    if (graph.counts[tree.parent[j]][j] > 0) ++out.shared;
  }
  if (out.tree_edges == 0) {
    out.precision_defined = false;
  } else {
    out.precision = static_cast<double>(out.shared) / static_cast<double>(out.tree_edges);
  }
  if (out.graph_edges == 0) {
    out.recall_defined = false;
  } else {
    out.recall = static_cast<double>(out.shared) / static_cast<double>(out.graph_edges);
  }
  return out;
}

}  // namespace structsum
