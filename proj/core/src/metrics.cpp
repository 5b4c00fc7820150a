#include "structsum/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "structsum/error.hpp"

namespace structsum {

namespace {

std::string fold_case(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> fold_tokens(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(fold_case(t));
  return out;
}

std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& toks,
                                                      std::size_t n) {
  std::map<std::vector<std::string>, long> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

bool contains_subsequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> flatten(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const Sentence& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<CopiedSpan> find_copied_spans(const Document& source,
                                          const std::vector<std::string>& summary,
                                          std::size_t min_len) {
  if (summary.empty() || source.sentences.empty())
    throw validation_error("find_copied_spans: empty summary or source");

  std::vector<std::vector<std::string>> src;
  src.reserve(source.sentences.size());
  for (const Sentence& s : source.sentences) src.push_back(fold_tokens(s));
  const std::vector<std::string> sum = fold_tokens(summary);

  std::vector<CopiedSpan> spans;
  std::size_t pos = 0;
  while (pos < sum.size()) {
    std::size_t best_len = 0, best_sent = 0, best_off = 0;
    for (std::size_t s = 0; s < src.size(); ++s) {
      for (std::size_t o = 0; o < src[s].size(); ++o) {
        std::size_t len = 0;
        while (pos + len < sum.size() && o + len < src[s].size() &&
               sum[pos + len] == src[s][o + len])
          ++len;
        if (len > best_len) {  // strict: ties keep the earliest (sentence, offset)
          best_len = len;
          best_sent = s;
          best_off = o;
        }
      }
    }
    if (best_len >= min_len) {
      spans.push_back(CopiedSpan{pos, pos + best_len, best_len, best_sent, best_off});
      pos += best_len;
    } else {
      ++pos;
    }
  }
  return spans;
}

CopyStats copy_stats(const std::vector<CopiedSpan>& spans, std::size_t n_sentences,
                     std::size_t /*summary_length*/) {
  CopyStats out;
  out.layout_histogram.assign(n_sentences, 0.0);
  if (spans.empty()) return out;

  double total_len = 0.0;
  std::set<std::size_t> covered;
  for (const CopiedSpan& sp : spans) {
    total_len += static_cast<double>(sp.length);
    covered.insert(sp.source_sentence);
    out.layout_histogram[sp.source_sentence] += 1.0;
  }
  out.mean_defined = true;
  out.mean_copy_length = total_len / static_cast<double>(spans.size());
  out.sentence_coverage =
      static_cast<double>(covered.size()) / static_cast<double>(n_sentences);
  for (double& v : out.layout_histogram) v /= static_cast<double>(spans.size());
  return out;
}

NovelNgramRates novel_ngram_rates(const Document& source,
                                  const std::vector<Sentence>& summary,
                                  const std::vector<std::size_t>& n_values) {
  const std::vector<std::string> src = fold_tokens(flatten(source.sentences));
  const std::vector<std::string> sum = fold_tokens(flatten(summary));

  NovelNgramRates out;
  for (std::size_t n : n_values) {
    if (sum.size() < n) {
      out.defined[n] = false;
      out.rate[n] = 0.0;
      continue;
    }
    std::set<std::vector<std::string>> src_grams;
    for (std::size_t i = 0; n <= src.size() && i + n <= src.size(); ++i)
      src_grams.insert(std::vector<std::string>(src.begin() + i, src.begin() + i + n));
    std::size_t total = sum.size() - n + 1, novel = 0;
    for (std::size_t i = 0; i + n <= sum.size(); ++i) {
      std::vector<std::string> gram(sum.begin() + i, sum.begin() + i + n);
      if (!src_grams.count(gram)) ++novel;
    }
    out.defined[n] = true;
    out.rate[n] = static_cast<double>(novel) / static_cast<double>(total);
  }

  if (!summary.empty()) {
    std::size_t novel_sents = 0;
    for (const Sentence& s : summary)
      if (!contains_subsequence(src, fold_tokens(s))) ++novel_sents;
    out.sentence_rate_defined = true;
    out.novel_sentence_rate =
        static_cast<double>(novel_sents) / static_cast<double>(summary.size());
  }
  return out;
}

RougeScore rouge_n(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate, std::size_t n) {
  if (n < 1) throw validation_error("rouge_n: n must be >= 1");
  RougeScore out;
  const auto ref = ngram_counts(fold_tokens(reference), n);
  const auto cand = ngram_counts(fold_tokens(candidate), n);
  long ref_total = 0, cand_total = 0, overlap = 0;
  for (const auto& [g, c] : ref) ref_total += c;
  for (const auto& [g, c] : cand) {
    cand_total += c;
    auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  if (ref_total == 0 || cand_total == 0) {
    out.defined = false;
    return out;
  }
  out.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  out.precision = static_cast<double>(overlap) / static_cast<double>(cand_total);
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

RougeScore rouge_l(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate) {
  RougeScore out;
  const auto ref = fold_tokens(reference);
  const auto cand = fold_tokens(candidate);
  if (ref.empty() || cand.empty()) {
    out.defined = false;
    return out;
  }
  std::vector<std::vector<std::size_t>> lcs(ref.size() + 1,
                                            std::vector<std::size_t>(cand.size() + 1, 0));
  for (std::size_t i = 1; i <= ref.size(); ++i)
    for (std::size_t j = 1; j <= cand.size(); ++j)
      lcs[i][j] = ref[i - 1] == cand[j - 1] ? lcs[i - 1][j - 1] + 1
                                            : std::max(lcs[i - 1][j], lcs[i][j - 1]);
  const double l = static_cast<double>(lcs[ref.size()][cand.size()]);
  out.recall = l / static_cast<double>(ref.size());
  out.precision = l / static_cast<double>(cand.size());
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

TreeDepthStats tree_depth_stats(const std::vector<Arborescence>& trees) {
  TreeDepthStats out;
  if (trees.empty()) return out;
  double depth_sum = 0.0, leaf_sum = 0.0;
  for (const Arborescence& t : trees) {
    t.validate();
    const std::size_t d = t.depth();
    out.depth_histogram[d] += 1.0;
    depth_sum += static_cast<double>(d);
    leaf_sum += t.leaf_proportion();
  }
  const double count = static_cast<double>(trees.size());
  for (auto& [d, v] : out.depth_histogram) v /= count;
  out.mean_depth = depth_sum / count;
  out.leaf_proportion = leaf_sum / count;
  return out;
}

MetricsReport analyze_document(const Document& doc, std::size_t min_copy_len,
                               const std::vector<std::size_t>& ngram_orders) {
  doc.validate();
  if (!doc.generated_summary)
    throw validation_error("analyze_document: document '" + doc.id +
                           "' has no generated_summary");
  const std::vector<Sentence>& gen = *doc.generated_summary;
  const std::vector<std::string> gen_flat = flatten(gen);

  MetricsReport report;
  report.summary_length = gen_flat.size();
  const auto spans = find_copied_spans(doc, gen_flat, min_copy_len);
  report.copy = copy_stats(spans, doc.n_sentences(), gen_flat.size());
  report.novelty = novel_ngram_rates(doc, gen, ngram_orders);
  if (doc.reference_summary) {
    const std::vector<std::string> ref_flat = flatten(*doc.reference_summary);
    report.rouge["rouge-1"] = rouge_n(ref_flat, gen_flat, 1);
    report.rouge["rouge-2"] = rouge_n(ref_flat, gen_flat, 2);
    report.rouge["rouge-l"] = rouge_l(ref_flat, gen_flat);
  }
  return report;
}

}  // namespace structsum
