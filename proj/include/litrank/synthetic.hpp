#pragma once
// Synthetic candidate lists whose labels depend on other candidates.
//
// Every query names a topic. A candidate is on-topic or off-topic, and each
// on-topic candidate carries a key; near-duplicates repeat the key of an
// earlier on-topic candidate with fresh filler tokens. Only the first
// on-topic candidate of each key (in list order) is relevant. Originals and
// duplicates are drawn from the same distribution, so a model that sees one
// candidate at a time cannot tell them apart.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/lit_encoder.hpp"
#include "litrank/metrics_eval.hpp"
#include "litrank/neural/params.hpp"

namespace litrank {

struct SyntheticSizes {
  std::size_t queries = 200;
  std::size_t docs_per_query = 16;
  std::size_t topics = 8;
  std::size_t keys = 8;
  std::size_t fillers = 32;
  std::size_t fillers_per_doc = 2;
  double duplicate_rate = 0.5;
  double on_topic_rate = 0.5;

  // specials, topics, keys, fillers
  std::size_t vocab_size() const { return 4 + topics + keys + fillers; }
  std::size_t topic_token(std::size_t t) const { return 4 + t; }
  std::size_t key_token(std::size_t k) const { return 4 + topics + k; }
  std::size_t filler_token(std::size_t f) const { return 4 + topics + keys + f; }

  void validate() const {
    if (queries == 0 || docs_per_query == 0) throw InvariantError("synthetic sizes must be positive");
    if (topics < 2) throw InvariantError("synthetic task needs at least 2 topics");
    if (keys == 0) throw InvariantError("synthetic task needs at least 1 key");
    if (fillers == 0 && fillers_per_doc > 0) throw InvariantError("synthetic task needs filler tokens");
    if (!(duplicate_rate >= 0.0 && duplicate_rate <= 1.0)) throw InvariantError("duplicate_rate must lie in [0,1]");
    if (!(on_topic_rate >= 0.0 && on_topic_rate <= 1.0)) throw InvariantError("on_topic_rate must lie in [0,1]");
  }
};

struct SyntheticDoc {
  std::string uid;
  std::vector<std::size_t> tokens;
  bool on_topic = false;
  bool duplicate = false;
  std::size_t key = 0;
  double label = 0.0;
};

struct SyntheticQuery {
  std::string qid;
  std::vector<std::size_t> query_tokens;
  std::vector<SyntheticDoc> docs;
};

struct SyntheticTask {
  SyntheticSizes sizes;
  std::uint64_t seed = 0;
  std::string stream;
  std::vector<SyntheticQuery> queries;

  std::string hash() const {
    Fnv1a h;
    for (const auto& q : queries) {
      h.update(q.qid);
      for (const auto t : q.query_tokens) h.update(std::to_string(t) + ",");
      for (const auto& d : q.docs) {
        h.update(d.uid);
        for (const auto t : d.tokens) h.update(std::to_string(t) + ",");
        h.update(d.label > 0.0 ? "+" : "-");
      }
    }
    return h.hex();
  }
};

inline SyntheticTask gen_synthetic(std::uint64_t seed, const SyntheticSizes& sizes, const std::string& stream = "train") {
  sizes.validate();
  SyntheticTask task{sizes, seed, stream, {}};
  nn::NamedRng rng(seed, "synthetic." + stream);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); };
  for (std::size_t qi = 0; qi < sizes.queries; ++qi) {
    SyntheticQuery q;
    q.qid = stream + "-" + std::to_string(qi);
    const auto topic = pick(sizes.topics);
    q.query_tokens = {sizes.topic_token(topic)};
    std::vector<std::size_t> seen_keys;
    std::unordered_set<std::size_t> used;
    for (std::size_t di = 0; di < sizes.docs_per_query; ++di) {
      SyntheticDoc d;
      d.uid = q.qid + "-d" + std::to_string(di);
      d.on_topic = rng.uniform() < sizes.on_topic_rate;
      std::size_t doc_topic = topic;
      if (d.on_topic) {
        // Once every key is in use, the only option left is a duplicate.
        const bool dup = !seen_keys.empty() && (rng.uniform() < sizes.duplicate_rate || seen_keys.size() == sizes.keys);
        if (dup) {
          d.key = seen_keys[pick(seen_keys.size())];
          d.duplicate = true;
        } else {
          std::vector<std::size_t> fresh;
          for (std::size_t k = 0; k < sizes.keys; ++k)
            if (!used.contains(k)) fresh.push_back(k);
          d.key = fresh[pick(fresh.size())];
          used.insert(d.key);
          seen_keys.push_back(d.key);
        }
        d.label = d.duplicate ? 0.0 : 1.0;
      } else {
        doc_topic = (topic + 1 + pick(sizes.topics - 1)) % sizes.topics;
        d.key = pick(sizes.keys);
      }
      d.tokens = {sizes.topic_token(doc_topic), sizes.key_token(d.key)};
      for (std::size_t f = 0; f < sizes.fillers_per_doc; ++f) d.tokens.push_back(sizes.filler_token(pick(sizes.fillers)));
      q.docs.push_back(std::move(d));
    }
    task.queries.push_back(std::move(q));
  }
  return task;
}

struct TrainingExample {
  std::string qid;
  std::vector<std::string> uids;
  std::vector<EncodedPair> docs;
  std::vector<double> labels;
};

inline std::vector<TrainingExample> to_examples(const SyntheticTask& task, std::size_t max_tokens) {
  std::vector<TrainingExample> out;
  for (const auto& q : task.queries) {
    TrainingExample ex{q.qid, {}, {}, {}};
    for (const auto& d : q.docs) {
      ex.uids.push_back(d.uid);
      ex.docs.push_back(encode_pair(q.query_tokens, d.tokens, max_tokens));
      ex.labels.push_back(d.label);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// Expected AP when r relevant items sit uniformly at random among n:
// (1/n) * sum_k [1/k + (k-1)(r-1) / ((n-1) k)].
inline double expected_random_ap(std::size_t n, std::size_t r) {
  if (r == 0) throw std::invalid_argument("undefined AP: no relevant items");
  if (n == 1) return 1.0;
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    s += 1.0 / kk + (kk - 1.0) * static_cast<double>(r - 1) / (static_cast<double>(n - 1) * kk);
  }
  return s / static_cast<double>(n);
}

// Best MAP reachable from one candidate at a time: on-topic candidates first,
// but originals and duplicates are exchangeable among themselves.
inline double isolated_bound_map(const SyntheticTask& task) {
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& q : task.queries) {
    std::size_t on = 0, rel = 0;
    for (const auto& d : q.docs) {
      on += d.on_topic ? 1 : 0;
      rel += d.label > 0.0 ? 1 : 0;
    }
    if (rel == 0) continue;
    sum += expected_random_ap(on, rel);
    ++scored;
  }
  return scored ? sum / static_cast<double>(scored) : 0.0;
}

// Scores a list the way a reader with the whole list in view would: on-topic
// candidates whose key has not appeared earlier get 2, later repeats 1,
// off-topic 0. Reads tokens only, never labels.
inline std::vector<double> order_aware_oracle_scores(const SyntheticQuery& q) {
  std::vector<double> out;
  std::unordered_set<std::size_t> seen;
  const auto topic = q.query_tokens.at(0);
  for (const auto& d : q.docs) {
    if (d.tokens.at(0) != topic) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(seen.insert(d.tokens.at(1)).second ? 2.0 : 1.0);
  }
  return out;
}

inline double order_aware_oracle_map(const SyntheticTask& task) {
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& q : task.queries) {
    const auto scores = order_aware_oracle_scores(q);
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    std::vector<std::string> ranking, gold;
    for (const auto i : order) ranking.push_back(q.docs[i].uid);
    for (const auto& d : q.docs)
      if (d.label > 0.0) gold.push_back(d.uid);
    if (gold.empty()) continue;
    sum += average_precision(ranking, gold);
    ++scored;
  }
  return scored ? sum / static_cast<double>(scored) : 0.0;
}

// One line per candidate: qid, uid, label, token ids.
inline void write_synthetic(const std::filesystem::path& path, const SyntheticTask& task) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& q : task.queries) {
    for (const auto& d : q.docs) {
      out << q.qid << '\t' << d.uid << '\t' << (d.label > 0.0 ? 1 : 0) << '\t';
      for (std::size_t i = 0; i < d.tokens.size(); ++i) out << (i ? " " : "") << d.tokens[i];
      out << '\n';
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace litrank
