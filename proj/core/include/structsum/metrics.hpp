#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "structsum/document.hpp"
#include "structsum/tree.hpp"

namespace structsum {

// A maximal contiguous summary token run found verbatim in one source
// sentence (case-folded), length >= the configured minimum.
struct CopiedSpan {
  std::size_t summary_start = 0;
  std::size_t summary_end = 0;  // exclusive
  std::size_t length = 0;
  std::size_t source_sentence = 0;
  std::size_t source_offset = 0;
};

std::vector<CopiedSpan> find_copied_spans(const Document& source,
                                          const std::vector<std::string>& summary,
                                          std::size_t min_len = 4);

struct CopyStats {
  double mean_copy_length = 0.0;
  bool mean_defined = false;
  double sentence_coverage = 0.0;
  std::vector<double> layout_histogram;  // per source sentence position, sums to 1
};

CopyStats copy_stats(const std::vector<CopiedSpan>& spans, std::size_t n_sentences,
                     std::size_t summary_length);

struct NovelNgramRates {
  std::map<std::size_t, double> rate;       // n -> fraction of novel n-grams
  std::map<std::size_t, bool> defined;      // false when summary shorter than n
  double novel_sentence_rate = 0.0;         // summary sentences not copied verbatim
  bool sentence_rate_defined = false;
};

NovelNgramRates novel_ngram_rates(const Document& source,
                                  const std::vector<Sentence>& summary,
                                  const std::vector<std::size_t>& n_values = {1, 2, 3, 4});

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool defined = true;
};

RougeScore rouge_n(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate, std::size_t n);

RougeScore rouge_l(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate);

struct TreeDepthStats {
  std::map<std::size_t, double> depth_histogram;  // depth -> fraction of trees
  double mean_depth = 0.0;
  double leaf_proportion = 0.0;
};

TreeDepthStats tree_depth_stats(const std::vector<Arborescence>& trees);

// Everything the analyzer reports for one document.
struct MetricsReport {
  CopyStats copy;
  NovelNgramRates novelty;
  std::map<std::string, RougeScore> rouge;  // "rouge-1", "rouge-2", "rouge-l"
  std::size_t summary_length = 0;
};

MetricsReport analyze_document(const Document& doc, std::size_t min_copy_len,
                               const std::vector<std::size_t>& ngram_orders);

std::vector<std::string> flatten(const std::vector<Sentence>& sentences);

}  // namespace structsum
