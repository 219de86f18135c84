#pragma once
// BM25 sparse vectors, cosine ranking, and iterative multi-hop retrieval (I-BM25).
//
// Scores everywhere are cosine similarities between BM25-weighted vectors.
// Ties are broken by ascending UID so that runs are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "litrank/binary_io.hpp"
#include "litrank/corpus_io.hpp"
#include "litrank/text_pipeline.hpp"

namespace litrank {

using TermId = Vocabulary::TermId;

struct SparseEntry {
  TermId term;
  double weight;

  bool operator==(const SparseEntry&) const = default;
};

// Entries sorted by strictly increasing term id, no zero weights.
struct SparseVector {
  std::vector<SparseEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  double norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.weight;
    return std::sqrt(s);
  }
  double weight_of(TermId t) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), t,
                                     [](const SparseEntry& e, TermId id) { return e.term < id; });
    return it != entries.end() && it->term == t ? it->weight : 0.0;
  }
  bool operator==(const SparseVector&) const = default;
};

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->term < j->term) {
      ++i;
    } else if (j->term < i->term) {
      ++j;
    } else {
      s += i->weight * j->weight;
      ++i;
      ++j;
    }
  }
  return s;
}

inline double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double denom = a.norm() * b.norm();
  return denom > 0.0 ? dot(a, b) / denom : 0.0;
}

// Coordinate-wise max(a, scale * b).
inline SparseVector max_merge(const SparseVector& a, const SparseVector& b, double scale = 1.0) {
  SparseVector out;
  out.entries.reserve(a.size() + b.size());
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  auto push = [&](TermId t, double w) {
    if (w > 0.0) out.entries.push_back({t, w});
  };
  while (i != a.entries.end() || j != b.entries.end()) {
    if (j == b.entries.end() || (i != a.entries.end() && i->term < j->term)) {
      push(i->term, i->weight);
      ++i;
    } else if (i == a.entries.end() || j->term < i->term) {
      push(j->term, scale * j->weight);
      ++j;
    } else {
      push(i->term, std::max(i->weight, scale * j->weight));
      ++i;
      ++j;
    }
  }
  return out;
}

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

inline double bm25_idf(std::size_t num_docs, std::uint32_t df) {
  const double n = static_cast<double>(num_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

inline double bm25_term_weight(double tf, double doc_len, double avgdl, double idf, const Bm25Params& p) {
  return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * doc_len / avgdl));
}

struct RankedEntry {
  std::string uid;
  double score;

  bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
  std::string qid;
  std::vector<RankedEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<std::string> uids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.uid);
    return out;
  }
  bool operator==(const RankedList&) const = default;
};

// Counts full passes over the index; one pass scores every candidate once.
struct ScoringStats {
  std::size_t scoring_passes = 0;
};

class SparseIndex {
 public:
  static constexpr std::string_view kMagic{"LTRIDX\0\0", 8};
  static constexpr std::uint32_t kVersion = 1;

  SparseIndex() = default;

  // `fact_tokens[i]` must be the preprocessed text of `facts.at(i)`.
  SparseIndex(const FactStore& facts, const std::vector<TokenList>& fact_tokens, Bm25Params params)
      : params_(params) {
    if (facts.empty()) throw InvariantError("cannot index an empty fact store");
    if (facts.size() != fact_tokens.size()) throw InvariantError("fact/token list count mismatch");
    vocab_ = build_vocabulary(fact_tokens);
    uids_.reserve(facts.size());
    double total_len = 0.0;
    for (std::size_t i = 0; i < facts.size(); ++i) {
      uids_.push_back(facts.at(i).uid);
      total_len += static_cast<double>(fact_tokens[i].size());
    }
    avgdl_ = total_len / static_cast<double>(facts.size());
    // A store whose facts are all stopwords still needs a positive avgdl.
    if (!(avgdl_ > 0.0)) avgdl_ = 1.0;
    idf_.resize(vocab_.size());
    for (TermId t = 0; t < vocab_.size(); ++t) idf_[t] = bm25_idf(facts.size(), vocab_.doc_freq(t));
    vectors_.reserve(facts.size());
    for (const auto& tokens : fact_tokens) vectors_.push_back(weigh(tokens));
    finish();
  }

  SparseVector vectorize(const TokenList& tokens) const { return weigh(tokens); }

  // Cosine of `query` against every fact, one scoring pass.
  std::vector<double> score_all(const SparseVector& query, ScoringStats* stats = nullptr) const {
    if (stats) ++stats->scoring_passes;
    std::vector<double> acc(vectors_.size(), 0.0);
    if (query.empty()) return acc;
    for (const auto& e : query.entries) {
      if (e.term >= postings_.size()) continue;
      for (const auto& [doc, w] : postings_[e.term]) acc[doc] += e.weight * w;
    }
    const double qn = query.norm();
    for (std::size_t d = 0; d < acc.size(); ++d) {
      const double denom = qn * norms_[d];
      acc[d] = acc[d] != 0.0 && denom > 0.0 ? acc[d] / denom : 0.0;
    }
    return acc;
  }

  // Orders fact indices by (score desc, uid asc).
  bool better(std::size_t a, std::size_t b, const std::vector<double>& scores) const {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return uid_rank_[a] < uid_rank_[b];
  }

  std::size_t size() const { return vectors_.size(); }
  const std::string& uid(std::size_t i) const { return uids_.at(i); }
  const std::vector<std::string>& uids() const { return uids_; }
  const SparseVector& vector(std::size_t i) const { return vectors_.at(i); }
  double norm(std::size_t i) const { return norms_.at(i); }
  double idf(TermId t) const { return idf_.at(t); }
  double avgdl() const { return avgdl_; }
  const Bm25Params& params() const { return params_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    binio::put_u32(out, kVersion);
    binio::put_f64(out, params_.k1);
    binio::put_f64(out, params_.b);
    binio::put_f64(out, avgdl_);
    binio::put_u64(out, vocab_.size());
    for (TermId t = 0; t < vocab_.size(); ++t) {
      binio::put_string(out, vocab_.term(t));
      binio::put_u32(out, vocab_.doc_freq(t));
    }
    binio::put_u64(out, uids_.size());
    for (std::size_t d = 0; d < uids_.size(); ++d) {
      binio::put_string(out, uids_[d]);
      binio::put_u32(out, static_cast<std::uint32_t>(vectors_[d].size()));
      for (const auto& e : vectors_[d].entries) {
        binio::put_u32(out, e.term);
        binio::put_f64(out, e.weight);
      }
    }
    if (!out) throw InputError("write failed: " + path.string());
  }

  static SparseIndex load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    binio::expect_magic(in, kMagic, path.string());
    if (const auto v = binio::get_u32(in); v != kVersion)
      throw InputError(path.string() + ": unsupported index version " + std::to_string(v));
    SparseIndex idx;
    idx.params_.k1 = binio::get_f64(in);
    idx.params_.b = binio::get_f64(in);
    idx.avgdl_ = binio::get_f64(in);
    const auto nterms = binio::get_u64(in);
    std::vector<std::string> terms;
    std::vector<std::uint32_t> dfs;
    for (std::uint64_t t = 0; t < nterms; ++t) {
      terms.push_back(binio::get_string(in));
      dfs.push_back(binio::get_u32(in));
    }
    idx.vocab_ = Vocabulary::from_parts(std::move(terms), std::move(dfs));
    const auto ndocs = binio::get_u64(in);
    for (std::uint64_t d = 0; d < ndocs; ++d) {
      idx.uids_.push_back(binio::get_string(in));
      SparseVector v;
      const auto n = binio::get_u32(in);
      for (std::uint32_t k = 0; k < n; ++k) {
        const auto term = binio::get_u32(in);
        const auto w = binio::get_f64(in);
        if (term >= nterms) throw InputError(path.string() + ": term id out of range");
        v.entries.push_back({term, w});
      }
      idx.vectors_.push_back(std::move(v));
    }
    idx.idf_.resize(idx.vocab_.size());
    for (TermId t = 0; t < idx.vocab_.size(); ++t) idx.idf_[t] = bm25_idf(ndocs, idx.vocab_.doc_freq(t));
    idx.finish();
    return idx;
  }

 private:
  SparseVector weigh(const TokenList& tokens) const {
    std::vector<TermId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
      if (const auto id = vocab_.find(t)) ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
    const double len = static_cast<double>(ids.size());
    SparseVector v;
    for (std::size_t i = 0; i < ids.size();) {
      std::size_t j = i;
      while (j < ids.size() && ids[j] == ids[i]) ++j;
      const double w = bm25_term_weight(static_cast<double>(j - i), len, avgdl_, idf_[ids[i]], params_);
      if (w > 0.0) v.entries.push_back({ids[i], w});
      i = j;
    }
    return v;
  }

  void finish() {
    norms_.clear();
    postings_.assign(vocab_.size(), {});
    for (std::uint32_t d = 0; d < vectors_.size(); ++d) {
      norms_.push_back(vectors_[d].norm());
      for (const auto& e : vectors_[d].entries) postings_[e.term].emplace_back(d, e.weight);
    }
    std::vector<std::size_t> order(uids_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return uids_[a] < uids_[b]; });
    uid_rank_.assign(uids_.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) uid_rank_[order[r]] = r;
  }

  Bm25Params params_;
  double avgdl_ = 1.0;
  Vocabulary vocab_;
  std::vector<double> idf_;
  std::vector<std::string> uids_;
  std::vector<SparseVector> vectors_;
  std::vector<double> norms_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
  std::vector<std::size_t> uid_rank_;
};

inline SparseIndex build_index(const FactStore& facts, const TextResources& res, Bm25Params params = {}) {
  return SparseIndex(facts, preprocess_facts(facts, res), params);
}

inline SparseVector vectorize_query(const TokenList& tokens, const SparseIndex& index) {
  return index.vectorize(tokens);
}

// Every fact ordered by cosine to `query`.
inline RankedList rank_bm25(const SparseVector& query, const SparseIndex& index, std::string qid = {},
                            ScoringStats* stats = nullptr) {
  const auto scores = index.score_all(query, stats);
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return index.better(a, b, scores); });
  RankedList out{std::move(qid), {}};
  out.entries.reserve(order.size());
  for (const auto d : order) out.entries.push_back({index.uid(d), scores[d]});
  return out;
}

struct IterConfig {
  double downscale = 0.5;
  int start_exponent = 0;

  void validate() const {
    if (!(downscale >= 0.0 && downscale <= 1.0)) throw InvariantError("downscale must lie in [0,1]");
    if (start_exponent < 0) throw InvariantError("start_exponent must be >= 0");
  }
};

// Per-iteration record, used by tests and diagnostics.
struct IterationTrace {
  std::vector<SparseVector> queries;  // query used to score iteration i
  std::vector<std::size_t> batch_sizes;
};

// I-BM25. Iteration i (exponent n = n0 + i) takes the best min(2^n, remaining)
// unselected facts under the current query, max-pools their vectors, and merges
// the pooled vector into the query as q = max(q, downscale * pooled).
//
// Emitted score = (iterations - i) + cosine / max cosine of iteration i, which
// keeps the list non-increasing while preserving selection order.
inline RankedList rank_iterative(const SparseVector& query, const SparseIndex& index, const IterConfig& cfg,
                                 std::string qid = {}, ScoringStats* stats = nullptr,
                                 IterationTrace* trace = nullptr) {
  cfg.validate();
  const std::size_t n = index.size();
  std::vector<char> selected(n, 0);
  std::vector<std::size_t> order;
  std::vector<double> cos_of;
  std::vector<std::size_t> iter_of;
  std::vector<double> iter_max;
  order.reserve(n);
  cos_of.reserve(n);
  iter_of.reserve(n);

  SparseVector q = query;
  int exponent = cfg.start_exponent;
  std::vector<std::size_t> pool;
  while (order.size() < n) {
    const std::size_t remaining = n - order.size();
    const std::size_t want = exponent >= 62 ? remaining : std::min<std::size_t>(std::size_t{1} << exponent, remaining);
    if (trace) {
      trace->queries.push_back(q);
      trace->batch_sizes.push_back(want);
    }
    const auto scores = index.score_all(q, stats);
    pool.clear();
    for (std::size_t d = 0; d < n; ++d)
      if (!selected[d]) pool.push_back(d);
    auto cmp = [&](auto a, auto b) { return index.better(a, b, scores); };
    if (want < pool.size()) {
      std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want), pool.end(), cmp);
    } else {
      std::sort(pool.begin(), pool.end(), cmp);
    }
    const std::size_t iteration = iter_max.size();
    SparseVector pooled;
    for (std::size_t k = 0; k < want; ++k) {
      const auto d = pool[k];
      selected[d] = 1;
      order.push_back(d);
      cos_of.push_back(scores[d]);
      iter_of.push_back(iteration);
      pooled = max_merge(pooled, index.vector(d));
    }
    iter_max.push_back(scores[pool[0]]);
    if (cfg.downscale > 0.0) q = max_merge(q, pooled, cfg.downscale);
    ++exponent;
  }

  const double iterations = static_cast<double>(iter_max.size());
  RankedList out{std::move(qid), {}};
  out.entries.reserve(n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double top = iter_max[iter_of[k]];
    const double within = top > 0.0 ? cos_of[k] / top : 0.0;
    out.entries.push_back({index.uid(order[k]), iterations - static_cast<double>(iter_of[k]) + within});
  }
  return out;
}

// One-candidate-per-hop expansion for `hops` hops, then the rest by the final
// query. Used as the pass-count baseline for rank_iterative.
inline RankedList rank_one_at_a_time(const SparseVector& query, const SparseIndex& index, double downscale,
                                     std::size_t hops, std::string qid = {}, ScoringStats* stats = nullptr) {
  const std::size_t n = index.size();
  std::vector<char> selected(n, 0);
  RankedList out{std::move(qid), {}};
  SparseVector q = query;
  double score = static_cast<double>(hops) + 2.0;
  for (std::size_t h = 0; h < hops && out.size() < n; ++h) {
    const auto scores = index.score_all(q, stats);
    std::size_t best = n;
    for (std::size_t d = 0; d < n; ++d) {
      if (!selected[d] && (best == n || index.better(d, best, scores))) best = d;
    }
    selected[best] = 1;
    out.entries.push_back({index.uid(best), score});
    score -= 1.0;
    q = max_merge(q, index.vector(best), downscale);
  }
  const auto scores = index.score_all(q, stats);
  std::vector<std::size_t> rest;
  for (std::size_t d = 0; d < n; ++d)
    if (!selected[d]) rest.push_back(d);
  std::sort(rest.begin(), rest.end(), [&](auto a, auto b) { return index.better(a, b, scores); });
  for (const auto d : rest) out.entries.push_back({index.uid(d), scores[d]});
  return out;
}

inline RankedList top_k(const RankedList& ranked, std::size_t k) {
  RankedList out{ranked.qid, {}};
  const auto m = std::min(k, ranked.entries.size());
  out.entries.assign(ranked.entries.begin(), ranked.entries.begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

}  // namespace litrank
