#include <cmath>

#include "doctest.h"
#include "structsum/error.hpp"
#include "structsum/metrics.hpp"

using namespace structsum;

namespace {

// Worked micro-document: two source sentences, summary copies four tokens
// from each with one novel token between them.
Document two_span_doc() {
  Document doc;
  doc.id = "two-span";
  doc.sentences = {{"a", "b", "c", "d", "e", "f"}, {"g", "h", "i", "j"}};
  doc.generated_summary = {{{"a", "b", "c", "d", "x", "g", "h", "i", "j"}}};
  return doc;
}

Document cat_mat_doc() {
  Document doc;
  doc.id = "cat-mat";
  doc.sentences = {{"the", "cat", "sat", "on", "the", "mat"}};
  doc.generated_summary = {{{"the", "cat", "slept", "on", "the", "mat"}}};
  return doc;
}

}  // namespace

TEST_CASE("find_copied_spans greedy two-span trace") {
  const Document doc = two_span_doc();
  const auto spans = find_copied_spans(doc, flatten(*doc.generated_summary), 4);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].length == 4);
  CHECK(spans[0].source_sentence == 0);
  CHECK(spans[0].source_offset == 0);
  CHECK(spans[0].summary_start == 0);
  CHECK(spans[1].length == 4);
  CHECK(spans[1].source_sentence == 1);
  CHECK(spans[1].summary_start == 5);
}

TEST_CASE("find_copied_spans whole sentence and no overlap") {
  Document doc;
  doc.id = "d";
  doc.sentences = {{"p", "q", "r", "s", "t"}};
  const auto whole = find_copied_spans(doc, {"p", "q", "r", "s", "t"}, 4);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].length == 5);

  const auto none = find_copied_spans(doc, {"p", "q", "z", "s", "t"}, 4);
  CHECK(none.empty());
}

TEST_CASE("find_copied_spans is case-folded and spans do not overlap") {
  Document doc;
  doc.id = "case";
  doc.sentences = {{"The", "Cat", "Sat", "On", "Mats"}};
  const auto spans = find_copied_spans(doc, {"the", "cat", "sat", "on"}, 4);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].length == 4);
}

TEST_CASE("property: raising min_len never adds spans") {
  const Document doc = two_span_doc();
  const auto sum = flatten(*doc.generated_summary);
  std::size_t prev = find_copied_spans(doc, sum, 2).size();
  for (std::size_t min_len = 3; min_len <= 6; ++min_len) {
    const std::size_t count = find_copied_spans(doc, sum, min_len).size();
    CHECK(count <= prev);
    prev = count;
  }
}

TEST_CASE("copy_stats worked values") {
  const Document doc = two_span_doc();
  const auto spans = find_copied_spans(doc, flatten(*doc.generated_summary), 4);
  const CopyStats stats = copy_stats(spans, 2, 9);
  CHECK(stats.mean_defined);
  CHECK(stats.mean_copy_length == doctest::Approx(4.0));
  CHECK(stats.sentence_coverage == doctest::Approx(1.0));
  REQUIRE(stats.layout_histogram.size() == 2);
  CHECK(stats.layout_histogram[0] == doctest::Approx(0.5));
  CHECK(stats.layout_histogram[1] == doctest::Approx(0.5));
}

TEST_CASE("copy_stats empty and concentrated") {
  const CopyStats empty = copy_stats({}, 4, 10);
  CHECK(!empty.mean_defined);
  CHECK(empty.mean_copy_length == 0.0);
  CHECK(empty.sentence_coverage == 0.0);

  std::vector<CopiedSpan> spans(3);
  for (auto& sp : spans) {
    sp.length = 4;
    sp.source_sentence = 0;
  }
  const CopyStats stats = copy_stats(spans, 10, 30);
  CHECK(stats.sentence_coverage == doctest::Approx(0.1));
  CHECK(stats.layout_histogram[0] == doctest::Approx(1.0));
}

TEST_CASE("novel_ngram_rates cat/mat trigram example") {
  const Document doc = cat_mat_doc();
  const auto rates = novel_ngram_rates(doc, *doc.generated_summary);
  CHECK(rates.rate.at(3) == doctest::Approx(0.75));  // 3 of 4 trigrams novel
  CHECK(rates.defined.at(3));
}

TEST_CASE("novel_ngram_rates identity and disjoint") {
  Document doc;
  doc.id = "d";
  doc.sentences = {{"u", "v", "w", "x"}};
  const auto copied = novel_ngram_rates(doc, {{"u", "v", "w", "x"}});
  for (std::size_t n = 1; n <= 4; ++n) CHECK(copied.rate.at(n) == 0.0);
  CHECK(copied.novel_sentence_rate == 0.0);

  const auto novel = novel_ngram_rates(doc, {{"zebra"}});
  CHECK(novel.rate.at(1) == doctest::Approx(1.0));
  CHECK(!novel.defined.at(2));  // summary shorter than n
  CHECK(novel.novel_sentence_rate == doctest::Approx(1.0));
}

TEST_CASE("rouge_n worked values") {
  const auto same = rouge_n({"x", "y", "z"}, {"x", "y", "z"}, 1);
  CHECK(same.precision == doctest::Approx(1.0));
  CHECK(same.recall == doctest::Approx(1.0));
  CHECK(same.f1 == doctest::Approx(1.0));

  const auto partial = rouge_n({"the", "cat", "sat"}, {"the", "cat"}, 1);
  CHECK(partial.precision == doctest::Approx(1.0));
  CHECK(partial.recall == doctest::Approx(2.0 / 3.0));
  CHECK(partial.f1 == doctest::Approx(0.8));

  const auto disjoint = rouge_n({"a", "b"}, {"c", "d"}, 1);
  CHECK(disjoint.precision == 0.0);
  CHECK(disjoint.recall == 0.0);
  CHECK(disjoint.f1 == 0.0);

  const auto empty = rouge_n({}, {"a"}, 1);
  CHECK(!empty.defined);
}

TEST_CASE("rouge_n clips repeated n-grams") {
  const auto r = rouge_n({"a", "b"}, {"a", "a", "a"}, 1);
  CHECK(r.precision == doctest::Approx(1.0 / 3.0));
  CHECK(r.recall == doctest::Approx(0.5));
}

TEST_CASE("rouge_l worked values") {
  const auto same = rouge_l({"x", "y"}, {"x", "y"});
  CHECK(same.f1 == doctest::Approx(1.0));

  const auto lcs3 = rouge_l({"a", "b", "c", "d"}, {"a", "c", "d"});
  CHECK(lcs3.precision == doctest::Approx(1.0));
  CHECK(lcs3.recall == doctest::Approx(0.75));
  CHECK(lcs3.f1 == doctest::Approx(6.0 / 7.0));

  const auto reversed = rouge_l({"a", "b", "c", "d"}, {"d", "c", "b", "a"});
  CHECK(reversed.recall == doctest::Approx(0.25));  // LCS length 1

  CHECK(!rouge_l({}, {"a"}).defined);
}

TEST_CASE("tree_depth_stats star, chain, and mixed corpus") {
  Arborescence star{4, 0, {kNoParent, 0, 0, 0}};
  Arborescence chain{4, 0, {kNoParent, 0, 1, 2}};

  const auto star_stats = tree_depth_stats({star});
  CHECK(star_stats.depth_histogram.at(2) == doctest::Approx(1.0));
  CHECK(star_stats.leaf_proportion == doctest::Approx(0.75));

  const auto chain_stats = tree_depth_stats({chain});
  CHECK(chain_stats.depth_histogram.at(4) == doctest::Approx(1.0));
  CHECK(chain_stats.leaf_proportion == doctest::Approx(0.25));

  const auto mixed = tree_depth_stats({star, chain});
  CHECK(mixed.depth_histogram.at(2) == doctest::Approx(0.5));
  CHECK(mixed.depth_histogram.at(4) == doctest::Approx(0.5));
  CHECK(mixed.mean_depth == doctest::Approx(3.0));
}

TEST_CASE("analyze_document assembles the full report") {
  Document doc = two_span_doc();
  doc.reference_summary = {{{"a", "b", "c", "d", "x", "g", "h", "i", "j"}}};
  const MetricsReport report = analyze_document(doc, 4, {1, 2, 3, 4});
  CHECK(report.copy.mean_copy_length == doctest::Approx(4.0));
  CHECK(report.copy.sentence_coverage == doctest::Approx(1.0));
  CHECK(report.summary_length == 9);
  CHECK(report.rouge.at("rouge-1").f1 == doctest::Approx(1.0));
  CHECK(report.rouge.at("rouge-l").f1 == doctest::Approx(1.0));

  Document no_summary;
  no_summary.id = "n";
  no_summary.sentences = {{"a"}};
  CHECK_THROWS_AS(analyze_document(no_summary, 4, {1}), validation_error);
}
