#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace structsum {

// A token span inside one sentence; end is exclusive.
struct Mention {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct Entity {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  std::string type;
};

using Sentence = std::vector<std::string>;

// Annotated input document: tokenized sentences plus coreference clusters,
// entity mentions, and optional reference/generated summaries.
struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::vector<std::vector<Mention>> coref_clusters;
  std::vector<Entity> entities;
  std::optional<std::vector<Sentence>> reference_summary;
  std::optional<std::vector<Sentence>> generated_summary;

  std::size_t n_sentences() const { return sentences.size(); }
  void validate() const;  // throws validation_error naming the offending item
};

}  // namespace structsum
