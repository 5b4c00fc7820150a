#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "structsum/document.hpp"
#include "structsum/matrix.hpp"

namespace structsum {

// One JSON document per line. Parsing validates every index invariant and
// warns (stderr) about unknown fields.
Document load_document(const std::string& text);
std::string serialize_document(const Document& doc);

std::vector<Document> load_corpus(std::istream& in);
std::vector<Document> load_corpus_file(const std::string& path);

// Deterministic JSON rendering: fixed key order (callers use ordered_json),
// reals with 6 significant digits, no locale dependence.
std::string render_json(const nlohmann::ordered_json& value);

void write_text_file(const std::string& path, const std::string& content);

// Flat named-tensor parameter files: little-endian, 64-bit values, shape
// headers per tensor. Order of tensors is preserved.
using NamedTensors = std::vector<std::pair<std::string, Matrix>>;

void save_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::string& path);

}  // namespace structsum
