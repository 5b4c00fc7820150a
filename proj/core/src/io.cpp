#include "structsum/io.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "structsum/error.hpp"

namespace structsum {

namespace {

using nlohmann::json;

void warn_unknown_fields(const json& obj, std::initializer_list<const char*> known,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known)
      if (key == k) found = true;
    if (!found)
      std::cerr << "warning: ignoring unknown field '" << key << "' in " << context << "\n";
  }
}

// A sentence may be {"tokens": [...]} or a bare token array.
Sentence parse_sentence(const json& j, const std::string& context) {
  const json* toks = &j;
  if (j.is_object()) {
    if (!j.contains("tokens"))
      throw validation_error(context + ": sentence object missing 'tokens'");
    warn_unknown_fields(j, {"tokens"}, context);
    toks = &j.at("tokens");
  }
  if (!toks->is_array()) throw validation_error(context + ": tokens must be an array");
  Sentence out;
  for (const json& t : *toks) {
    if (!t.is_string()) throw validation_error(context + ": token must be a string");
    out.push_back(t.get<std::string>());
  }
  return out;
}

std::vector<Sentence> parse_sentence_list(const json& j, const std::string& context) {
  if (!j.is_array()) throw validation_error(context + ": expected an array of sentences");
  std::vector<Sentence> out;
  for (const json& s : j) out.push_back(parse_sentence(s, context));
  return out;
}

}  // namespace

Document load_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("document parse error: ") + e.what());
  }
  if (!j.is_object()) throw validation_error("document must be a JSON object");
  warn_unknown_fields(j,
                      {"id", "sentences", "coref_clusters", "entities",
                       "reference_summary", "generated_summary"},
                      "document");
  if (!j.contains("sentences"))
    throw validation_error("document missing required field 'sentences'");

  Document doc;
  doc.id = j.value("id", std::string{});
  doc.sentences = parse_sentence_list(j.at("sentences"), "document '" + doc.id + "'");

  if (j.contains("coref_clusters")) {
    for (const json& cluster : j.at("coref_clusters")) {
      std::vector<Mention> mentions;
      for (const json& m : cluster) {
        warn_unknown_fields(m, {"sent", "start", "end"}, "coref mention");
        mentions.push_back(Mention{m.at("sent").get<std::size_t>(),
                                   m.at("start").get<std::size_t>(),
                                   m.at("end").get<std::size_t>()});
      }
      doc.coref_clusters.push_back(std::move(mentions));
    }
  }
  if (j.contains("entities")) {
    for (const json& e : j.at("entities")) {
      warn_unknown_fields(e, {"sent", "start", "end", "text", "type"}, "entity");
      doc.entities.push_back(Entity{e.at("sent").get<std::size_t>(),
                                    e.at("start").get<std::size_t>(),
                                    e.at("end").get<std::size_t>(),
                                    e.at("text").get<std::string>(),
                                    e.value("type", std::string{})});
    }
  }
  if (j.contains("reference_summary"))
    doc.reference_summary = parse_sentence_list(j.at("reference_summary"), "reference_summary");
  if (j.contains("generated_summary"))
    doc.generated_summary = parse_sentence_list(j.at("generated_summary"), "generated_summary");

  doc.validate();
  return doc;
}

std::string serialize_document(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["sentences"] = nlohmann::ordered_json::array();
  for (const Sentence& s : doc.sentences) j["sentences"].push_back({{"tokens", s}});
  if (!doc.coref_clusters.empty()) {
    auto clusters = nlohmann::ordered_json::array();
    for (const auto& cluster : doc.coref_clusters) {
      auto arr = nlohmann::ordered_json::array();
      for (const Mention& m : cluster)
        arr.push_back({{"sent", m.sentence}, {"start", m.start}, {"end", m.end}});
      clusters.push_back(arr);
    }
    j["coref_clusters"] = clusters;
  }
  if (!doc.entities.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const Entity& e : doc.entities)
      arr.push_back({{"sent", e.sentence},
                     {"start", e.start},
                     {"end", e.end},
                     {"text", e.text},
                     {"type", e.type}});
    j["entities"] = arr;
  }
  const auto dump_summary = [](const std::vector<Sentence>& sents) {
    auto arr = nlohmann::ordered_json::array();
    for (const Sentence& s : sents) arr.push_back({{"tokens", s}});
    return arr;
  };
  if (doc.reference_summary) j["reference_summary"] = dump_summary(*doc.reference_summary);
  if (doc.generated_summary) j["generated_summary"] = dump_summary(*doc.generated_summary);
  return j.dump();
}

std::vector<Document> load_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      docs.push_back(load_document(line));
    } catch (const validation_error& e) {
      throw validation_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<Document> load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open corpus file: " + path);
  return load_corpus(in);
}

namespace {

void render_value(const nlohmann::ordered_json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        render_value(value, out);
      }
      out += '}';
      break;
    }
    case nlohmann::ordered_json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        render_value(item, out);
      }
      out += ']';
      break;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", v.get<double>());
      out += buf;
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string render_json(const nlohmann::ordered_json& value) {
  std::string out;
  render_value(value, out);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open output file: " + path);
  out << content;
  if (!out) throw validation_error("write failed: " + path);
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'T', 'E', 'N', 'S', '0', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
  // Hosts here are little-endian; the format is defined as such.
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw validation_error("tensor file truncated");
  return value;
}

}  // namespace

void save_tensors(const std::string& path, const NamedTensors& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open tensor file for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint64_t>(out, tensors.size());
  for (const auto& [name, m] : tensors) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint64_t>(out, m.rows());
    write_le<std::uint64_t>(out, m.cols());
    for (double v : m.data()) write_le<double>(out, v);
  }
  if (!out) throw validation_error("write failed: " + path);
}

NamedTensors load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open tensor file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw validation_error("bad tensor file magic: " + path);
  const auto count = read_le<std::uint64_t>(in);
  NamedTensors tensors;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto name_len = read_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_le<std::uint64_t>(in);
    const auto cols = read_le<std::uint64_t>(in);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = read_le<double>(in);
    tensors.emplace_back(std::move(name), std::move(m));
  }
  return tensors;
}

}  // namespace structsum
