// Command-line surface over the structure-induction and summary-analysis
// toolkit. Subcommands: induce, graph, analyze, compare, train, gradcheck.
// Exit codes: 0 success, 2 input/validation error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "structsum/error.hpp"
#include "structsum/fusion.hpp"
#include "structsum/graph.hpp"
#include "structsum/io.hpp"
#include "structsum/matrix.hpp"
#include "structsum/metrics.hpp"
#include "structsum/scorer.hpp"
#include "structsum/trainer.hpp"
#include "structsum/tree.hpp"

namespace {

using nlohmann::ordered_json;
using namespace structsum;

constexpr const char* kVersion = "0.1.0";

void emit(const ordered_json& report, const std::string& out_path) {
  const std::string text = render_json(report);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic stand-in for a learned encoder: every token hashes to a
// fixed vector, sentences are max-pooled.
Matrix hashed_sentence_reps(const Document& doc, std::size_t width, std::uint64_t seed) {
  std::vector<Matrix> token_vecs;
  token_vecs.reserve(doc.n_sentences());
  for (const Sentence& sent : doc.sentences) {
    Matrix toks(std::max<std::size_t>(sent.size(), 1), width);
    for (std::size_t t = 0; t < sent.size(); ++t) {
      const std::uint64_t h = fnv1a(sent[t]) ^ seed;
      for (std::size_t k = 0; k < width; ++k) {
        const std::uint64_t bits = splitmix(h + 0x100000001b3ULL * k);
        toks(t, k) = 2.0 * std::ldexp(static_cast<double>(bits >> 11), -53) - 1.0;
      }
    }
    token_vecs.push_back(std::move(toks));
  }
  return pool_sentences(token_vecs);
}

ordered_json tree_to_json(const Arborescence& t) {
  ordered_json j;
  j["root"] = t.root;
  auto parents = ordered_json::array();
  for (std::size_t v = 0; v < t.n; ++v)
    parents.push_back(t.parent[v] == kNoParent ? ordered_json(nullptr)
                                               : ordered_json(t.parent[v]));
  j["parent"] = parents;
  j["depth"] = t.depth();
  j["leaf_proportion"] = t.leaf_proportion();
  return j;
}

ordered_json matrix_to_json(const Matrix& m) {
  auto rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

EdgeScores scores_from_json(const nlohmann::json& j) {
  EdgeScores s;
  const auto& f = j.at("f");
  s.n = f.size();
  s.f = Matrix(s.n, s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    if (f[i].size() != s.n) throw validation_error("scores: 'f' must be square");
    for (std::size_t jj = 0; jj < s.n; ++jj) s.f(i, jj) = f[i][jj].get<double>();
  }
  for (const auto& v : j.at("r")) s.r.push_back(v.get<double>());
  if (s.r.size() != s.n) throw validation_error("scores: 'r' length must match 'f'");
  s.validate();
  return s;
}

std::vector<EdgeScores> load_scores_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open scores file: " + path);
  std::vector<EdgeScores> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(scores_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("scores line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ScorerParams scorer_params_from_tensors(const NamedTensors& tensors) {
  ScorerParams p;
  for (const auto& [name, m] : tensors) {
    if (name == "fp") p.fp = m;
    else if (name == "fc") p.fc = m;
    else if (name == "wa") p.wa = m;
    else if (name == "fr") p.fr = m;
    else throw validation_error("unknown tensor in scorer parameter file: " + name);
  }
  p.d_proj = p.fp.rows();
  p.d_struct = p.fp.cols();
  p.validate();
  return p;
}

NamedTensors scorer_params_to_tensors(const ScorerParams& p) {
  return {{"fp", p.fp}, {"fc", p.fc}, {"wa", p.wa}, {"fr", p.fr}};
}

SentenceGraph build_graph(const Document& doc, bool use_ner, bool merge) {
  if (merge) return merge_counts(build_coref_counts(doc), build_ner_counts(doc));
  return use_ner ? build_ner_counts(doc) : build_coref_counts(doc);
}

ordered_json rouge_to_json(const RougeScore& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["defined"] = r.defined;
  return j;
}

struct InduceOptions {
  std::string corpus_path;
  std::string scores_path;
  std::string params_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool emit_marginals = false;
};

int run_induce(const InduceOptions& opt) {
  std::vector<EdgeScores> all_scores;
  std::vector<std::string> ids;
  if (!opt.scores_path.empty()) {
    all_scores = load_scores_file(opt.scores_path);
    for (std::size_t i = 0; i < all_scores.size(); ++i)
      ids.push_back("scores-" + std::to_string(i));
  } else {
    if (opt.corpus_path.empty())
      throw validation_error("induce: need --corpus with --params, or --scores");
    const ScorerParams params = scorer_params_from_tensors(load_tensors(opt.params_path));
    for (const Document& doc : load_corpus_file(opt.corpus_path)) {
      const Matrix d_vecs = hashed_sentence_reps(doc, params.d_struct, opt.seed);
      all_scores.push_back(score_edges(d_vecs, params));
      ids.push_back(doc.id);
    }
  }

  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "induce";
  report["config"] = {{"seed", opt.seed}, {"emit_marginals", opt.emit_marginals}};
  auto docs_json = ordered_json::array();
  std::vector<Arborescence> trees;
  for (std::size_t i = 0; i < all_scores.size(); ++i) {
    const TreeMarginals m = marginals(all_scores[i]);
    const Arborescence tree = cle_decode(all_scores[i]);
    tree.validate();
    trees.push_back(tree);
    ordered_json d;
    d["id"] = ids[i];
    d["n_sentences"] = all_scores[i].n;
    d["log_z"] = m.log_z;
    d["root_probabilities"] = m.a_root;
    d["tree"] = tree_to_json(tree);
    if (opt.emit_marginals) d["edge_marginals"] = matrix_to_json(m.a);
    docs_json.push_back(d);
  }
  report["documents"] = docs_json;

  const TreeDepthStats stats = tree_depth_stats(trees);
  ordered_json agg;
  agg["n_documents"] = trees.size();
  ordered_json hist;
  for (const auto& [depth, frac] : stats.depth_histogram)
    hist[std::to_string(depth)] = frac;
  agg["depth_histogram"] = hist;
  agg["mean_depth"] = stats.mean_depth;
  agg["leaf_proportion"] = stats.leaf_proportion;
  report["aggregates"] = agg;
  emit(report, opt.out_path);
  return 0;
}

struct GraphOptions {
  std::string corpus_path;
  std::string out_path;
  double epsilon = 5e-4;
  bool use_ner = false;
  bool merge = false;
};

int run_graph(const GraphOptions& opt) {
  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "graph";
  report["config"] = {{"epsilon", opt.epsilon},
                      {"use_ner", opt.use_ner},
                      {"merge", opt.merge}};
  auto docs_json = ordered_json::array();
  for (const Document& doc : load_corpus_file(opt.corpus_path)) {
    const SentenceGraph g = build_graph(doc, opt.use_ner, opt.merge);
    ordered_json d;
    d["id"] = doc.id;
    d["n_sentences"] = g.n;
    d["counts"] = g.counts;
    if (g.n >= 2) {
      const AdjacencyK k = normalize_adjacency(g, opt.epsilon);
      d["k"] = matrix_to_json(k.k);
    }
    docs_json.push_back(d);
  }
  report["documents"] = docs_json;
  emit(report, opt.out_path);
  return 0;
}

struct AnalyzeOptions {
  std::string corpus_path;
  std::string out_path;
  std::size_t min_copy_len = 4;
  std::vector<std::size_t> ngram_orders = {1, 2, 3, 4};
};

int run_analyze(const AnalyzeOptions& opt) {
  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "analyze";
  report["config"] = {{"min_copy_len", opt.min_copy_len},
                      {"ngram_orders", opt.ngram_orders}};
  auto docs_json = ordered_json::array();

  std::size_t n_docs = 0;
  double sum_copy_len = 0.0, sum_coverage = 0.0, sum_sent_rate = 0.0;
  std::size_t copy_len_defined = 0;
  std::map<std::size_t, std::pair<double, std::size_t>> ngram_sums;

  for (const Document& doc : load_corpus_file(opt.corpus_path)) {
    const MetricsReport m = analyze_document(doc, opt.min_copy_len, opt.ngram_orders);
    ++n_docs;
    ordered_json d;
    d["id"] = doc.id;
    d["summary_length"] = m.summary_length;
    d["mean_copy_length"] = m.copy.mean_copy_length;
    d["mean_copy_length_defined"] = m.copy.mean_defined;
    d["sentence_coverage"] = m.copy.sentence_coverage;
    d["layout_histogram"] = m.copy.layout_histogram;
    ordered_json rates;
    for (const auto& [n, rate] : m.novelty.rate) {
      rates[std::to_string(n)] = {{"rate", rate},
                                  {"defined", m.novelty.defined.at(n)}};
      if (m.novelty.defined.at(n)) {
        ngram_sums[n].first += rate;
        ++ngram_sums[n].second;
      }
    }
    d["novel_ngram_rates"] = rates;
    d["novel_sentence_rate"] = m.novelty.novel_sentence_rate;
    d["whole_sentence_copy_rate"] = 1.0 - m.novelty.novel_sentence_rate;
    ordered_json rj;
    for (const auto& [name, score] : m.rouge) rj[name] = rouge_to_json(score);
    d["rouge"] = rj;
    docs_json.push_back(d);

    if (m.copy.mean_defined) {
      sum_copy_len += m.copy.mean_copy_length;
      ++copy_len_defined;
    }
    sum_coverage += m.copy.sentence_coverage;
    sum_sent_rate += m.novelty.novel_sentence_rate;
  }
  report["documents"] = docs_json;

  ordered_json agg;
  agg["n_documents"] = n_docs;
  agg["empty"] = (n_docs == 0);
  if (n_docs > 0) {
    agg["mean_copy_length"] =
        copy_len_defined > 0 ? sum_copy_len / static_cast<double>(copy_len_defined) : 0.0;
    agg["mean_sentence_coverage"] = sum_coverage / static_cast<double>(n_docs);
    agg["mean_novel_sentence_rate"] = sum_sent_rate / static_cast<double>(n_docs);
    ordered_json rates;
    for (const auto& [n, acc] : ngram_sums)
      rates[std::to_string(n)] =
          acc.second > 0 ? acc.first / static_cast<double>(acc.second) : 0.0;
    agg["mean_novel_ngram_rates"] = rates;
  }
  report["aggregates"] = agg;
  emit(report, opt.out_path);
  return 0;
}

struct CompareOptions {
  std::string corpus_path;
  std::string scores_path;
  std::string params_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool use_ner = false;
  bool merge = false;
};

int run_compare(const CompareOptions& opt) {
  const std::vector<Document> docs = load_corpus_file(opt.corpus_path);
  std::vector<EdgeScores> all_scores;
  if (!opt.scores_path.empty()) {
    all_scores = load_scores_file(opt.scores_path);
    if (all_scores.size() != docs.size())
      throw validation_error("compare: scores count does not match corpus size");
  } else {
    const ScorerParams params = scorer_params_from_tensors(load_tensors(opt.params_path));
    for (const Document& doc : docs)
      all_scores.push_back(
          score_edges(hashed_sentence_reps(doc, params.d_struct, opt.seed), params));
  }

  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "compare";
  report["config"] = {{"use_ner", opt.use_ner}, {"merge", opt.merge}, {"seed", opt.seed}};
  auto docs_json = ordered_json::array();
  std::size_t shared = 0, tree_edges = 0, graph_edges = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Arborescence tree = cle_decode(all_scores[i]);
    const SentenceGraph g = build_graph(docs[i], opt.use_ner, opt.merge);
    const EdgeOverlap ov = edge_precision_recall(tree, g);
    ordered_json d;
    d["id"] = docs[i].id;
    d["precision"] = ov.precision;
    d["precision_defined"] = ov.precision_defined;
    d["recall"] = ov.recall;
    d["recall_defined"] = ov.recall_defined;
    d["shared_edges"] = ov.shared;
    d["tree_edges"] = ov.tree_edges;
    d["graph_edges"] = ov.graph_edges;
    docs_json.push_back(d);
    shared += ov.shared;
    tree_edges += ov.tree_edges;
    graph_edges += ov.graph_edges;
  }
  report["documents"] = docs_json;
  ordered_json agg;
  agg["micro_precision"] =
      tree_edges > 0 ? static_cast<double>(shared) / static_cast<double>(tree_edges) : 0.0;
  agg["micro_recall"] =
      graph_edges > 0 ? static_cast<double>(shared) / static_cast<double>(graph_edges) : 0.0;
  report["aggregates"] = agg;
  emit(report, opt.out_path);
  return 0;
}

struct TrainOptions {
  TrainConfig cfg;
  std::string params_out;
  std::string out_path;
};

int run_train(const TrainOptions& opt) {
  const TrainResult result = train(opt.cfg);
  if (!opt.params_out.empty())
    save_tensors(opt.params_out, scorer_params_to_tensors(result.params));

  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "train";
  report["config"] = {{"n_docs", opt.cfg.n_docs},
                      {"n_sentences", opt.cfg.n_sentences},
                      {"d_struct", opt.cfg.d_struct},
                      {"noise_sigma", opt.cfg.noise_sigma},
                      {"lr", opt.cfg.lr},
                      {"accumulator_init", opt.cfg.accumulator_init},
                      {"epochs", opt.cfg.epochs},
                      {"seed", opt.cfg.seed}};
  report["loss_trace"] = result.loss_trace;
  report["initial_uas"] = result.initial_uas;
  report["final_uas"] = result.final_uas;
  if (!result.loss_trace.empty()) {
    report["initial_loss"] = result.loss_trace.front();
    report["final_loss"] = result.loss_trace.back();
  }
  emit(report, opt.out_path);
  return 0;
}

struct GradcheckOptions {
  std::string component = "mtt";
  double tol = 1e-4;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::string out_path;
};

int run_gradcheck(const GradcheckOptions& opt) {
  const GradCheckComponent component = parse_component(opt.component);
  ordered_json report;
  report["tool_version"] = kVersion;
  report["command"] = "gradcheck";
  report["config"] = {{"component", opt.component},
                      {"tol", opt.tol},
                      {"seed", opt.seed},
                      {"trials", opt.trials}};
  auto trials = ordered_json::array();
  bool all_pass = true;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const GradCheckReport r = gradient_check(component, opt.seed + t, opt.tol);
    trials.push_back({{"seed", opt.seed + t},
                      {"coords_checked", r.coords_checked},
                      {"max_rel_err", r.max_rel_err},
                      {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  }
  report["trials"] = trials;
  report["pass"] = all_pass;
  emit(report, opt.out_path);
  if (!all_pass) {
    std::cerr << "gradcheck: max relative error exceeded tolerance\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence-structure induction and summary analysis toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  InduceOptions induce_opt;
  auto* induce = app.add_subcommand("induce", "Edge marginals, decoded trees, depth stats");
  induce->add_option("--corpus", induce_opt.corpus_path, "Line-delimited JSON documents");
  induce->add_option("--scores", induce_opt.scores_path,
                     "JSONL of raw edge scores {f, r} instead of a corpus");
  induce->add_option("--params", induce_opt.params_path, "Scorer parameter file");
  induce->add_option("--seed", induce_opt.seed, "Seed for the hashed encoder");
  induce->add_option("--out", induce_opt.out_path, "Report destination (default stdout)");
  induce->add_flag("--emit-marginals", induce_opt.emit_marginals,
                   "Include full marginal matrices in the report");

  GraphOptions graph_opt;
  auto* graph = app.add_subcommand("graph", "Coreference/NER sentence graphs and K");
  graph->add_option("--corpus", graph_opt.corpus_path)->required();
  graph->add_option("--epsilon", graph_opt.epsilon, "Smoothing for row normalization");
  graph->add_flag("--use-ner", graph_opt.use_ner, "Entity graph instead of coreference");
  graph->add_flag("--merge", graph_opt.merge, "Sum coreference and entity counts");
  graph->add_option("--out", graph_opt.out_path);

  AnalyzeOptions analyze_opt;
  auto* analyze = app.add_subcommand("analyze", "Copy, novelty, ROUGE metrics");
  analyze->add_option("--corpus", analyze_opt.corpus_path)->required();
  analyze->add_option("--min-copy-len", analyze_opt.min_copy_len,
                      "Minimum copied-span length");
  analyze->add_option("--ngrams", analyze_opt.ngram_orders, "N-gram orders to report");
  analyze->add_option("--out", analyze_opt.out_path);

  CompareOptions compare_opt;
  auto* compare = app.add_subcommand("compare", "Latent trees vs explicit graphs");
  compare->add_option("--corpus", compare_opt.corpus_path)->required();
  compare->add_option("--scores", compare_opt.scores_path);
  compare->add_option("--params", compare_opt.params_path);
  compare->add_option("--seed", compare_opt.seed);
  compare->add_flag("--use-ner", compare_opt.use_ner);
  compare->add_flag("--merge", compare_opt.merge);
  compare->add_option("--out", compare_opt.out_path);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Planted-tree learnability probe");
  train_cmd->add_option("--n-docs", train_opt.cfg.n_docs);
  train_cmd->add_option("--n-sentences", train_opt.cfg.n_sentences);
  train_cmd->add_option("--d-struct", train_opt.cfg.d_struct);
  train_cmd->add_option("--noise", train_opt.cfg.noise_sigma);
  train_cmd->add_option("--lr", train_opt.cfg.lr);
  train_cmd->add_option("--accumulator-init", train_opt.cfg.accumulator_init);
  train_cmd->add_option("--epochs", train_opt.cfg.epochs);
  train_cmd->add_option("--seed", train_opt.cfg.seed);
  train_cmd->add_option("--params-out", train_opt.params_out, "Save learned parameters");
  train_cmd->add_option("--out", train_opt.out_path);

  GradcheckOptions grad_opt;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--component", grad_opt.component,
                        "mtt | scorer | fusion | fusion-literal-c | loss");
  gradcheck->add_option("--tol", grad_opt.tol);
  gradcheck->add_option("--seed", grad_opt.seed);
  gradcheck->add_option("--trials", grad_opt.trials);
  gradcheck->add_option("--out", grad_opt.out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (induce->parsed()) return run_induce(induce_opt);
    if (graph->parsed()) return run_graph(graph_opt);
    if (analyze->parsed()) return run_analyze(analyze_opt);
    if (compare->parsed()) return run_compare(compare_opt);
    if (train_cmd->parsed()) return run_train(train_opt);
    if (gradcheck->parsed()) return run_gradcheck(grad_opt);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
