#pragma once
// WorldTree-format pipeline pieces shared by the CLI and the tests: query
// files, retrieval over a split, lambda tuning, and re-ranker examples.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/config.hpp"
#include "litrank/corpus_io.hpp"
#include "litrank/lit_encoder.hpp"
#include "litrank/metrics_eval.hpp"
#include "litrank/sparse_retrieval.hpp"
#include "litrank/synthetic.hpp"
#include "litrank/text_pipeline.hpp"

namespace litrank {

// One retrieval query: question stem plus correct answer, and its gold UIDs.
struct QueryRecord {
  std::string qid;
  std::string text;
  std::vector<std::string> gold;
};

inline std::vector<QueryRecord> make_queries(const std::vector<Question>& questions, Diagnostics& diag) {
  std::vector<QueryRecord> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back({q.qid, build_query_text(q, &diag), q.gold});
  return out;
}

// "qid<TAB>text<TAB>uid uid ..." per line.
inline void write_queries(const std::filesystem::path& path, const std::vector<QueryRecord>& queries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& q : queries) {
    std::string text = q.text;
    for (auto& c : text)
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    out << q.qid << '\t' << text << '\t';
    for (std::size_t i = 0; i < q.gold.size(); ++i) out << (i ? " " : "") << q.gold[i];
    out << '\n';
  }
  if (!out) throw InputError("write failed: " + path.string());
}

inline std::vector<QueryRecord> read_queries(const std::filesystem::path& path) {
  std::vector<QueryRecord> out;
  for (const auto& line : read_lines(path.string())) {
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 3) throw InputError(path.string() + ": malformed query line");
    QueryRecord q{cols[0], cols[1], {}};
    for (const auto& g : split(cols[2], ' '))
      if (!g.empty()) q.gold.push_back(g);
    out.push_back(std::move(q));
  }
  return out;
}

inline std::map<std::string, std::vector<std::string>> gold_map(const std::vector<QueryRecord>& queries) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& q : queries) out[q.qid] = q.gold;
  return out;
}

inline TextResources load_resources(const ExperimentConfig& cfg) {
  if (cfg.lemma_file.empty() != cfg.stopword_file.empty())
    throw InvariantError("lemma_file and stopword_file must be given together");
  if (cfg.lemma_file.empty()) return TextResources::load_default();
  for (const auto& p : {cfg.lemma_file, cfg.stopword_file})
    if (!std::filesystem::exists(p)) throw InputError("resource file not found: " + p);
  return TextResources::load(cfg.lemma_file, cfg.stopword_file);
}

enum class Method { bm25, ibm25 };

inline Method parse_method(const std::string& s) {
  if (s == "bm25") return Method::bm25;
  if (s == "ibm25") return Method::ibm25;
  throw InvariantError("unknown retrieval method '" + s + "'");
}

inline std::vector<RankedList> retrieve_all(const SparseIndex& index, const std::vector<QueryRecord>& queries,
                                            const TextResources& res, Method method, const IterConfig& iter,
                                            ScoringStats* stats = nullptr) {
  std::vector<RankedList> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const auto vec = index.vectorize(preprocess(q.text, res));
    out.push_back(method == Method::bm25 ? rank_bm25(vec, index, q.qid, stats)
                                         : rank_iterative(vec, index, iter, q.qid, stats));
  }
  return out;
}

inline std::map<std::string, std::vector<std::string>> ranking_map(const std::vector<RankedList>& lists) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& l : lists) out[l.qid] = l.uids();
  return out;
}

struct LambdaSearch {
  double best = 0.0;
  double best_map = -1.0;
  std::vector<std::pair<double, double>> trials;  // (lambda, MAP)
};

// Grid search of the I-BM25 down-scale factor; ties keep the smaller lambda.
inline LambdaSearch tune_lambda(const SparseIndex& index, const std::vector<QueryRecord>& queries,
                                const TextResources& res, const std::vector<double>& grid, int start_exponent) {
  if (grid.empty()) throw InvariantError("lambda grid is empty");
  LambdaSearch s;
  const auto golds = gold_map(queries);
  for (const auto l : grid) {
    const auto lists = retrieve_all(index, queries, res, Method::ibm25, {l, start_exponent});
    const double m = mean_average_precision(ranking_map(lists), golds).map;
    s.trials.emplace_back(l, m);
    if (m > s.best_map || (m == s.best_map && l < s.best)) {
      s.best_map = m;
      s.best = l;
    }
  }
  return s;
}

// Rankings written as predictions read back as RankedLists (order only).
inline std::vector<RankedList> read_rankings(const std::filesystem::path& path) {
  std::vector<RankedList> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& line : read_lines(path.string())) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError(path.string() + ": malformed ranking line");
    const auto qid = line.substr(0, tab);
    auto [it, fresh] = slot.emplace(qid, out.size());
    if (fresh) out.push_back({qid, {}});
    auto& list = out[it->second];
    list.entries.push_back({line.substr(tab + 1), -static_cast<double>(list.entries.size())});
  }
  return out;
}

// Model vocabulary: specials, then index terms in term-id order.
inline TokenVocab token_vocab_from(const SparseIndex& index) {
  TokenVocab v;
  for (const auto& t : index.vocabulary().terms()) v.add(t);
  return v;
}

inline PairEncoder make_encoder(const SparseIndex& index, const FactStore& facts, const TextResources& res,
                                std::size_t max_tokens) {
  PairEncoder enc(token_vocab_from(index), max_tokens);
  for (const auto& f : facts.facts()) enc.add_fact(f.uid, preprocess(f.text, res));
  return enc;
}

// Top-k candidates of each ranking, labelled by gold membership.
inline std::vector<TrainingExample> rerank_examples(const std::vector<RankedList>& rankings,
                                                    const std::vector<QueryRecord>& queries,
                                                    const PairEncoder& enc, const TextResources& res,
                                                    std::size_t k) {
  std::map<std::string, const QueryRecord*> by_id;
  for (const auto& q : queries) by_id[q.qid] = &q;
  std::vector<TrainingExample> out;
  for (const auto& r : rankings) {
    const auto it = by_id.find(r.qid);
    if (it == by_id.end() || it->second->gold.empty()) continue;
    const auto qids = enc.question_ids(preprocess(it->second->text, res));
    std::unordered_set<std::string> gold(it->second->gold.begin(), it->second->gold.end());
    TrainingExample ex{r.qid, {}, {}, {}};
    for (std::size_t i = 0; i < std::min(k, r.entries.size()); ++i) {
      const auto& uid = r.entries[i].uid;
      ex.uids.push_back(uid);
      ex.docs.push_back(enc.encode(qids, uid));
      ex.labels.push_back(gold.contains(uid) ? 1.0 : 0.0);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace litrank
