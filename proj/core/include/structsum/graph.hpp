#pragma once

#include <cstddef>
#include <vector>

#include "structsum/document.hpp"
#include "structsum/matrix.hpp"
#include "structsum/tree.hpp"

namespace structsum {

// Symmetric sentence-pair link counts with a zero diagonal.
struct SentenceGraph {
  std::size_t n = 0;
  std::vector<std::vector<long>> counts;

  static SentenceGraph zeros(std::size_t n) {
    return SentenceGraph{n, std::vector<std::vector<long>>(n, std::vector<long>(n, 0))};
  }
  std::size_t edge_count() const;  // undirected edges with count > 0
};

// counts(i,j) = number of distinct coreference clusters with mentions in both
// sentences i and j.
SentenceGraph build_coref_counts(const Document& doc);

// counts(i,j) = number of distinct case-folded entity surface strings shared
// by sentences i and j.
SentenceGraph build_ner_counts(const Document& doc);

SentenceGraph merge_counts(const SentenceGraph& g1, const SentenceGraph& g2);

struct AdjacencyK {
  std::size_t n = 0;
  Matrix k;  // row-stochastic, zero diagonal
};

// k(i,j) = (counts(i,j) + eps) / sum_{v != i} (counts(i,v) + eps); rows sum
// to 1 exactly, and a linkless sentence falls back to a uniform row.
AdjacencyK normalize_adjacency(const SentenceGraph& g, double epsilon = 5e-4);

struct EdgeOverlap {
  double precision = 0.0;  // over latent tree edges
  double recall = 0.0;     // over explicit graph edges
  bool precision_defined = true;
  bool recall_defined = true;
  std::size_t shared = 0;
  std::size_t tree_edges = 0;
  std::size_t graph_edges = 0;
};

// Undirected edge overlap between a decoded tree and a binarized graph.
EdgeOverlap edge_precision_recall(const Arborescence& tree, const SentenceGraph& graph);

}  // namespace structsum
