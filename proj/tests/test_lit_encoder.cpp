#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "litrank/gradient_suite.hpp"
#include "litrank/lit_encoder.hpp"

using namespace litrank;
using D = nn::Tensor<double>;

namespace {

ModelConfig small(Variant v, std::size_t docs = 6) {
  ModelConfig c;
  c.variant = v;
  c.layers = 2;
  c.hidden = 16;
  c.heads = 4;
  c.adapter_dim = 4;
  c.ffn_dim = 24;
  c.max_tokens = 12;
  c.docs_per_question = docs;
  c.vocab_size = 30;
  return c;
}

std::vector<EncodedPair> docs_for(std::size_t n, std::uint64_t seed) {
  nn::NamedRng rng(seed, "docs");
  std::vector<EncodedPair> out;
  const std::vector<std::size_t> q{4, 5, 6};
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<std::size_t> f;
    const auto len = 1 + rng.next() % 5;
    for (std::size_t k = 0; k < len; ++k) f.push_back(4 + rng.next() % 26);
    out.push_back(encode_pair(q, f, 12));
  }
  return out;
}

}  // namespace

TEST(EncodePair, Layout) {
  const std::vector<std::size_t> q{7, 8}, f{9};
  const auto p = encode_pair(q, f, 10);
  EXPECT_EQ(p.ids, (std::vector<std::size_t>{TokenVocab::kCls, 7, 8, TokenVocab::kSep, 9, TokenVocab::kSep}));
  EXPECT_EQ(p.segments, (std::vector<std::size_t>{0, 0, 0, 0, 1, 1}));
}

TEST(EncodePair, EmptyFact) {
  const std::vector<std::size_t> q{7}, f{};
  EXPECT_EQ(encode_pair(q, f, 10).ids,
            (std::vector<std::size_t>{TokenVocab::kCls, 7, TokenVocab::kSep, TokenVocab::kSep}));
}

TEST(EncodePair, TruncatesFactFirstThenQuestion) {
  const std::vector<std::size_t> q{10, 11, 12, 13}, f{20, 21, 22, 23};
  const auto a = encode_pair(q, f, 9);
  EXPECT_EQ(a.size(), 9u);
  EXPECT_EQ(a.ids.front(), TokenVocab::kCls);
  EXPECT_EQ(a.ids, (std::vector<std::size_t>{1, 10, 11, 12, 13, 2, 20, 21, 2}));
  const auto b = encode_pair(q, f, 5);
  EXPECT_EQ(b.ids, (std::vector<std::size_t>{1, 10, 11, 2, 2}));
  EXPECT_THROW(encode_pair(q, f, 2), InvariantError);
}

TEST(EncodePair, VocabularyRoundTrip) {
  TokenVocab v;
  const TokenList q{"sun", "heat"}, f{"plant", "grow", "sun"};
  for (const auto& t : q) v.add(t);
  for (const auto& t : f) v.add(t);
  const auto p = encode_pair(v.ids(q), v.ids(f), 64);
  TokenList back;
  for (const auto id : p.ids)
    if (id != TokenVocab::kCls && id != TokenVocab::kSep) back.push_back(v.token(id));
  TokenList expect = q;
  expect.insert(expect.end(), f.begin(), f.end());
  EXPECT_EQ(back, expect);
  EXPECT_EQ(v.id("never-seen"), TokenVocab::kUnk);
}

TEST(TransformerLayer, ShapeAndAttentionRows) {
  LitModel<double> m(small(Variant::isolated), 3);
  nn::NamedRng rng(1, "x");
  std::vector<double> xv(6 * 16);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  const auto x = D::from({6, 16}, xv);
  AttentionProbe<double> probe;
  const auto y = transformer_layer<double>(x, m.layer(0), 4, &probe);
  EXPECT_EQ(y.shape(), x.shape());
  ASSERT_EQ(probe.probabilities.size(), 4u);
  for (const auto& p : probe.probabilities)
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < p.cols(); ++c) s += p.at(r, c);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(TransformerLayer, GradientCheckSixRows) {
  LitModel<double> m(small(Variant::isolated), 4);
  nn::NamedRng rng(2, "x");
  std::vector<double> xv(6 * 16);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  auto x = D::from({6, 16}, xv, true);
  const auto& p = m.layer(0);
  auto w = D::from({6, 16}, std::vector<double>(xv.rbegin(), xv.rend()));
  const auto res = nn::grad_check(
      [&] { return nn::sum(nn::mul(transformer_layer<double>(x, p, 4), w)); },
      {x, p.wq, p.wk, p.wv, p.wo, p.w1, p.w2, p.ln1_gain, p.ln2_bias});
  EXPECT_LT(res.max_rel_error, 1e-4) << res.worst;
}

TEST(Adapter, IdentityAtInit) {
  LitModel<double> m(small(Variant::lit), 5);
  ASSERT_EQ(m.adapter_count(), 2u);
  nn::NamedRng rng(3, "cls");
  for (const std::size_t n : {1u, 5u}) {
    std::vector<double> v(n * 16);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const auto cls = D::from({n, 16}, v);
    const auto out = lstm_adapter<double>(cls, m.adapter(0));
    EXPECT_EQ(out.shape(), cls.shape());
    EXPECT_TRUE(std::equal(out.data().begin(), out.data().end(), cls.data().begin()));
  }
}

TEST(Model, LogitShapeForAllVariants) {
  for (const auto v : {Variant::isolated, Variant::lstm_after, Variant::lit}) {
    LitModel<double> m(small(v), 1);
    for (const std::size_t n : {1u, 3u, 6u}) EXPECT_EQ(m.forward(docs_for(n, n)).shape(), (nn::Shape{n, 1}));
    EXPECT_EQ(m.forward({}).size(), 0u);
    EXPECT_THROW(m.forward(docs_for(7, 1)), InvariantError);
  }
}

TEST(Model, IsolatedIsPermutationEquivariantBitExact) {
  LitModel<double> m(small(Variant::isolated), 8);
  const auto docs = docs_for(6, 4);
  const auto base = m.score(docs);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<EncodedPair> shuffled;
  for (const auto i : perm) shuffled.push_back(docs[i]);
  const auto out = m.score(shuffled);
  for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(out[k], base[perm[k]]);
}

TEST(Model, LitEqualsIsolatedAtInit) {
  const auto docs = docs_for(5, 9);
  for (const auto v : {Variant::lit, Variant::lstm_after}) {
    LitModel<double> a(small(v), 21), b(small(Variant::isolated), 21);
    EXPECT_EQ(a.score(docs), b.score(docs));
  }
}

TEST(Model, LitIsOrderSensitiveWitness) {
  // With trained (non-zero) adapters, swapping two documents must change a logit.
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 20 && !found; ++seed) {
    LitModel<double> m(small(Variant::lit), seed);
    randomize_adapters(m, seed);
    const auto docs = docs_for(2, seed);
    const auto a = m.score(docs);
    const auto b = m.score(std::vector<EncodedPair>{docs[1], docs[0]});
    found = a[0] != b[1] || a[1] != b[0];
  }
  EXPECT_TRUE(found);
}

TEST(Model, DeterministicForward) {
  LitModel<double> a(small(Variant::lit), 2), b(small(Variant::lit), 2);
  randomize_adapters(a, 2);
  randomize_adapters(b, 2);
  const auto docs = docs_for(4, 1);
  EXPECT_EQ(a.score(docs), b.score(docs));
  EXPECT_EQ(a.score(docs), a.score(docs));
}

TEST(Model, FloatAndDoubleAgree) {
  LitModel<double> d(small(Variant::lit), 6);
  LitModel<float> f(small(Variant::lit), 6);
  const auto docs = docs_for(4, 6);
  const auto a = d.score(docs), b = f.score(docs);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-4);
}

TEST(ModelConfig, SerializeRoundTrip) {
  auto c = small(Variant::lstm_after, 9);
  const auto back = ModelConfig::deserialize(c.serialize());
  EXPECT_EQ(back.serialize(), c.serialize());
  EXPECT_EQ(back.variant, Variant::lstm_after);
}

TEST(Rerank, KZeroIsIdentity) {
  RankedList r{"q", {{"a", 3.0}, {"b", 2.0}, {"c", 1.0}}};
  EXPECT_EQ(rerank_with_logits(r, 0, {}), r);
}

TEST(Rerank, TopBlockReorderedTailKept) {
  RankedList r{"q", {{"a", 5}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}}};
  const auto out = rerank_with_logits(r, 3, {0.1, 2.0, -1.0});
  EXPECT_EQ(out.uids(), (std::vector<std::string>{"b", "a", "c", "d", "e"}));
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LT(out.entries[i].score, out.entries[i - 1].score);
  EXPECT_THROW(rerank_with_logits(r, 3, {1.0}), InvariantError);
}

TEST(Rerank, ModelOutputIsPermutation) {
  LitModel<double> m(small(Variant::lit, 4), 3);
  TokenVocab vocab;
  for (int i = 0; i < 26; ++i) vocab.add("t" + std::to_string(i));
  PairEncoder enc(vocab, 12);
  RankedList r{"q", {}};
  for (int i = 0; i < 10; ++i) {
    enc.add_fact("u" + std::to_string(i), {"t" + std::to_string(i), "t" + std::to_string(i + 5)});
    r.entries.push_back({"u" + std::to_string(i), 10.0 - i});
  }
  const auto out = rerank(m, enc, enc.question_ids({"t1", "t2"}), r, 4);
  auto a = out.uids(), b = r.uids();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::equal(out.entries.begin() + 4, out.entries.end(), r.entries.begin() + 4,
                         [](const auto& x, const auto& y) { return x.uid == y.uid; }));
  EXPECT_EQ(rerank(m, enc, enc.question_ids({"t1"}), r, 0), r);
}
