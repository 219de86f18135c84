#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "litrank/sparse_retrieval.hpp"
#include "test_support.hpp"

using namespace litrank;

namespace {

// Straight-from-the-formula BM25, kept separate from the index code.
struct ReferenceBm25 {
  std::vector<std::map<std::string, int>> tf;
  std::vector<double> len;
  std::map<std::string, int> df;
  double avgdl = 0.0;
  double k1, b;

  ReferenceBm25(const std::vector<TokenList>& docs, double k1_, double b_) : k1(k1_), b(b_) {
    for (const auto& d : docs) {
      std::map<std::string, int> counts;
      for (const auto& t : d) ++counts[t];
      for (const auto& [t, c] : counts) ++df[t];
      tf.push_back(counts);
      len.push_back(static_cast<double>(d.size()));
      avgdl += static_cast<double>(d.size());
    }
    avgdl /= static_cast<double>(docs.size());
  }

  double idf(const std::string& t) const {
    const double n = static_cast<double>(tf.size());
    const double d = df.count(t) ? df.at(t) : 0;
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
  }

  std::map<std::string, double> weights(const TokenList& doc) const {
    std::map<std::string, int> counts;
    std::size_t known = 0;
    for (const auto& t : doc)
      if (df.count(t)) {
        ++counts[t];
        ++known;
      }
    std::map<std::string, double> w;
    for (const auto& [t, c] : counts)
      w[t] = idf(t) * c * (k1 + 1.0) / (c + k1 * (1.0 - b + b * static_cast<double>(known) / avgdl));
    return w;
  }
};

FactStore store_of(const std::vector<std::string>& texts) {
  FactStore s;
  for (std::size_t i = 0; i < texts.size(); ++i) s.add({"f" + std::to_string(i), texts[i], "t"});
  return s;
}

std::vector<TokenList> tokens_of(const std::vector<std::string>& texts) {
  std::vector<TokenList> out;
  for (const auto& t : texts) {
    TokenList toks;
    std::string cur;
    for (const char c : t + " ") {
      if (c == ' ') {
        if (!cur.empty()) toks.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(toks);
  }
  return out;
}

const std::vector<std::string> kToy = {"sun hot star sun", "sun big", "ice cold water cold cold"};

SparseIndex toy_index(Bm25Params p = {}) { return SparseIndex(store_of(kToy), tokens_of(kToy), p); }

// Random corpus with a Zipf-ish vocabulary.
SparseIndex random_index(std::size_t n, std::uint64_t seed, std::size_t vocab = 400) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    const auto len = 3 + rng() % 10;
    for (std::size_t k = 0; k < len; ++k) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      t += "w" + std::to_string(static_cast<std::size_t>(std::pow(u, 2.0) * vocab)) + " ";
    }
    texts.push_back(t);
  }
  return SparseIndex(store_of(texts), tokens_of(texts), {});
}

SparseVector vec(std::initializer_list<std::pair<TermId, double>> e) {
  SparseVector v;
  for (const auto& [t, w] : e) v.entries.push_back({t, w});
  return v;
}

}  // namespace

TEST(Bm25, WeightsMatchReferenceOracle) {
  for (const auto p : {Bm25Params{1.2, 0.75}, Bm25Params{2.0, 0.3}}) {
    const auto idx = toy_index(p);
    const ReferenceBm25 ref(tokens_of(kToy), p.k1, p.b);
    for (std::size_t d = 0; d < kToy.size(); ++d) {
      const auto expected = ref.weights(tokens_of(kToy)[d]);
      const auto& got = idx.vector(d);
      ASSERT_EQ(got.entries.size(), expected.size());
      for (const auto& e : got.entries) EXPECT_NEAR(e.weight, expected.at(idx.vocabulary().term(e.term)), 1e-9);
    }
  }
}

TEST(Bm25, QueryWeightsMatchReferenceOracle) {
  const auto idx = toy_index();
  const ReferenceBm25 ref(tokens_of(kToy), 1.2, 0.75);
  const TokenList q{"sun", "cold", "cold", "unknown"};
  const auto expected = ref.weights(q);
  const auto got = vectorize_query(q, idx);
  ASSERT_EQ(got.entries.size(), 2u);
  for (const auto& e : got.entries) EXPECT_NEAR(e.weight, expected.at(idx.vocabulary().term(e.term)), 1e-9);
}

TEST(Bm25, IdfOfUbiquitousTermIsPositive) {
  EXPECT_NEAR(bm25_idf(10, 10), std::log(1.0 + 0.5 / 10.5), 1e-15);
  EXPECT_GT(bm25_idf(10, 10), 0.0);
}

TEST(Bm25, TermWeightSaturates) {
  const double idf = 1.3;
  const Bm25Params p;
  EXPECT_NEAR(bm25_term_weight(1e12, 1e12, 5.0, idf, {p.k1, 0.0}), idf * (p.k1 + 1.0), 1e-9);
  EXPECT_LT(bm25_term_weight(1e6, 10.0, 5.0, idf, p), idf * (p.k1 + 1.0));
}

TEST(Bm25, DuplicateQueryTermWeighsMoreButLessThanDouble) {
  const auto idx = toy_index();
  const auto one = vectorize_query({"star"}, idx);
  const auto two = vectorize_query({"star", "star"}, idx);
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_GT(two.entries[0].weight, one.entries[0].weight);
  EXPECT_LT(two.entries[0].weight, 2.0 * one.entries[0].weight);
}

TEST(Bm25, UnknownQueryIsEmpty) { EXPECT_TRUE(vectorize_query({"zebra", "quux"}, toy_index()).empty()); }

TEST(Cosine, HandValues) {
  EXPECT_DOUBLE_EQ(cosine(vec({{1, 3}, {2, 4}}), vec({{2, 4}})), 0.8);
  EXPECT_EQ(cosine(vec({{1, 3}}), vec({{2, 4}})), 0.0);
  EXPECT_EQ(cosine(vec({}), vec({{2, 4}})), 0.0);
  const auto v = vec({{0, 0.3}, {5, 2.0}, {9, 1.1}});
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
}

TEST(RankBm25, PermutationWithUidTieBreak) {
  const auto idx = toy_index();
  const auto r = rank_bm25(vectorize_query({"cold"}, idx), idx);
  EXPECT_EQ(r.uids(), (std::vector<std::string>{"f2", "f0", "f1"}));
  EXPECT_GT(r.entries[0].score, 0.0);
  EXPECT_EQ(r.entries[1].score, 0.0);
}

TEST(RankIterative, SchedulePowersOfTwo) {
  const auto idx = random_index(7, 3);
  IterationTrace trace;
  ScoringStats stats;
  rank_iterative(idx.vectorize({"w1", "w2"}), idx, {0.5, 0}, "q", &stats, &trace);
  EXPECT_EQ(trace.batch_sizes, (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(stats.scoring_passes, 3u);
}

TEST(RankIterative, StartExponentShiftsSchedule) {
  const auto idx = random_index(20, 3);
  IterationTrace trace;
  rank_iterative(idx.vectorize({"w1"}), idx, {0.5, 2}, "q", nullptr, &trace);
  EXPECT_EQ(trace.batch_sizes, (std::vector<std::size_t>{4, 8, 8}));
}

TEST(RankIterative, LambdaZeroEqualsBm25) {
  const auto idx = random_index(300, 5);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    TokenList q;
    for (int k = 0; k < 4; ++k) q.push_back("w" + std::to_string(rng() % 60));
    const auto v = idx.vectorize(q);
    EXPECT_EQ(rank_iterative(v, idx, {0.0, 0}).uids(), rank_bm25(v, idx).uids());
  }
}

TEST(RankIterative, QueryGrowsMonotonically) {
  const auto idx = random_index(200, 6);
  IterationTrace trace;
  rank_iterative(idx.vectorize({"w3", "w10", "w50"}), idx, {0.7, 0}, "q", nullptr, &trace);
  for (std::size_t i = 1; i < trace.queries.size(); ++i) {
    for (const auto& e : trace.queries[i - 1].entries) EXPECT_GE(trace.queries[i].weight_of(e.term), e.weight);
  }
}

TEST(RankIterative, PermutationAndNonIncreasingScores) {
  const auto idx = random_index(150, 7);
  for (const double lambda : {0.1, 0.5, 1.0}) {
    const auto r = rank_iterative(idx.vectorize({"w0", "w7"}), idx, {lambda, 0});
    auto uids = r.uids();
    EXPECT_EQ(std::set<std::string>(uids.begin(), uids.end()).size(), idx.size());
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r.entries[i].score, r.entries[i - 1].score);
  }
}

TEST(RankIterative, LogarithmicPassCount) {
  const auto idx = random_index(9700, 11, 3000);
  ScoringStats batched, single;
  const auto q = idx.vectorize({"w1", "w2", "w3"});
  rank_iterative(q, idx, {0.5, 0}, "q", &batched);
  EXPECT_LE(batched.scoring_passes, static_cast<std::size_t>(std::ceil(std::log2(9700.0 + 1.0))));
  rank_one_at_a_time(q, idx, 0.5, 128, "q", &single);
  EXPECT_EQ(single.scoring_passes, 129u);
}

TEST(RankIterative, RejectsBadConfig) {
  const auto idx = toy_index();
  EXPECT_THROW(rank_iterative(idx.vectorize({"sun"}), idx, {1.5, 0}), InvariantError);
  EXPECT_THROW(rank_iterative(idx.vectorize({"sun"}), idx, {0.5, -1}), InvariantError);
}

TEST(TopK, PrefixProperty) {
  const auto idx = random_index(50, 1);
  const auto r = rank_bm25(idx.vectorize({"w2"}), idx);
  EXPECT_EQ(top_k(r, 500).size(), 50u);
  EXPECT_EQ(top_k(r, 0).size(), 0u);
  const auto a = top_k(r, 7), b = top_k(r, 20);
  EXPECT_TRUE(std::equal(a.entries.begin(), a.entries.end(), b.entries.begin()));
}

TEST(SparseIndexIo, SaveLoadRoundTrip) {
  litrank::testing::TempDir dir;
  const auto idx = random_index(120, 2);
  idx.save(dir / "index.bin");
  const auto back = SparseIndex::load(dir / "index.bin");
  const auto q = idx.vectorize({"w4", "w9"});
  const auto a = rank_iterative(q, idx, {0.5, 0});
  const auto b = rank_iterative(back.vectorize({"w4", "w9"}), back, {0.5, 0});
  EXPECT_EQ(a, b);
}

TEST(SparseIndexIo, CorruptFileRejected) {
  litrank::testing::TempDir dir;
  litrank::testing::write_text(dir / "bad.bin", "not an index");
  EXPECT_THROW(SparseIndex::load(dir / "bad.bin"), InputError);
}
