#pragma once
// Small transformer cross-encoder for (question, fact) pairs with optional
// LSTM adapters that couple the [CLS] states of all candidates of a question.
//
//   ISOLATED    each pair is scored on its own
//   LSTM_AFTER  one adapter over the final-layer [CLS] states, before the head
//   LIT         an adapter after every transformer layer (untied weights)
//
// An adapter maps the D x H [CLS] block (candidates in retrieval order) to
// cls + up(lstm(down(cls))). The up projection starts at zero, so a fresh
// adapter is an exact identity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/neural/params.hpp"
#include "litrank/neural/tensor.hpp"
#include "litrank/sparse_retrieval.hpp"

namespace litrank {

enum class Variant { isolated, lstm_after, lit };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::isolated: return "isolated";
    case Variant::lstm_after: return "lstm_after";
    case Variant::lit: return "lit";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "isolated" || s == "ISOLATED") return Variant::isolated;
  if (s == "lstm_after" || s == "LSTM_AFTER") return Variant::lstm_after;
  if (s == "lit" || s == "LIT") return Variant::lit;
  throw InvariantError("unknown variant '" + std::string(s) + "'");
}

struct ModelConfig {
  Variant variant = Variant::lit;
  std::size_t layers = 3;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t adapter_dim = 16;
  std::size_t lstm_layers = 2;
  std::size_t ffn_dim = 128;
  std::size_t max_tokens = 64;
  std::size_t docs_per_question = 16;
  std::size_t vocab_size = 0;

  void validate() const {
    if (hidden == 0 || heads == 0 || hidden % heads != 0) throw InvariantError("hidden must be divisible by heads");
    if (adapter_dim == 0 || adapter_dim >= hidden) throw InvariantError("adapter_dim must be in (0, hidden)");
    if (lstm_layers != 2) throw InvariantError("lstm_layers must be 2");
    if (layers == 0) throw InvariantError("layers must be >= 1");
    if (max_tokens < 3) throw InvariantError("max_tokens must be >= 3");
    if (vocab_size < 4) throw InvariantError("vocab_size must cover the special tokens");
    if (docs_per_question == 0) throw InvariantError("docs_per_question must be >= 1");
  }

  std::string serialize() const {
    std::ostringstream out;
    out << "variant=" << to_string(variant) << '\n'
        << "layers=" << layers << '\n'
        << "hidden=" << hidden << '\n'
        << "heads=" << heads << '\n'
        << "adapter_dim=" << adapter_dim << '\n'
        << "lstm_layers=" << lstm_layers << '\n'
        << "ffn_dim=" << ffn_dim << '\n'
        << "max_tokens=" << max_tokens << '\n'
        << "docs_per_question=" << docs_per_question << '\n'
        << "vocab_size=" << vocab_size << '\n';
    return out.str();
  }

  static ModelConfig deserialize(const std::string& text) {
    ModelConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(0, eq);
      const auto val = line.substr(eq + 1);
      if (key == "variant") c.variant = parse_variant(val);
      else if (key == "layers") c.layers = std::stoul(val);
      else if (key == "hidden") c.hidden = std::stoul(val);
      else if (key == "heads") c.heads = std::stoul(val);
      else if (key == "adapter_dim") c.adapter_dim = std::stoul(val);
      else if (key == "lstm_layers") c.lstm_layers = std::stoul(val);
      else if (key == "ffn_dim") c.ffn_dim = std::stoul(val);
      else if (key == "max_tokens") c.max_tokens = std::stoul(val);
      else if (key == "docs_per_question") c.docs_per_question = std::stoul(val);
      else if (key == "vocab_size") c.vocab_size = std::stoul(val);
    }
    return c;
  }
};

// Model-side token vocabulary. Ids 0..3 are reserved for the special tokens.
class TokenVocab {
 public:
  static constexpr std::size_t kPad = 0, kCls = 1, kSep = 2, kUnk = 3;

  TokenVocab() {
    for (const char* s : {"[PAD]", "[CLS]", "[SEP]", "[UNK]"}) add(s);
  }

  std::size_t add(const std::string& token) {
    const auto [it, inserted] = ids_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }
  std::size_t id(const std::string& token) const {
    const auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }
  std::vector<std::size_t> ids(const TokenList& tokens) const {
    std::vector<std::size_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> tokens_;
};

struct EncodedPair {
  std::vector<std::size_t> ids;
  std::vector<std::size_t> segments;

  std::size_t size() const { return ids.size(); }
};

// [CLS] question [SEP] fact [SEP], at most max_tokens long. Fact tokens are
// cut first, then question tokens.
inline EncodedPair encode_pair(std::span<const std::size_t> question, std::span<const std::size_t> fact,
                               std::size_t max_tokens) {
  if (max_tokens < 3) throw InvariantError("max_tokens must be >= 3");
  const std::size_t budget = max_tokens - 3;
  std::size_t nq = question.size();
  std::size_t nf = fact.size();
  if (nq + nf > budget) {
    nf = nq >= budget ? 0 : budget - nq;
    nq = std::min(nq, budget);
  }
  EncodedPair p;
  p.ids.reserve(nq + nf + 3);
  p.ids.push_back(TokenVocab::kCls);
  p.ids.insert(p.ids.end(), question.begin(), question.begin() + static_cast<std::ptrdiff_t>(nq));
  p.ids.push_back(TokenVocab::kSep);
  p.segments.assign(p.ids.size(), 0);
  p.ids.insert(p.ids.end(), fact.begin(), fact.begin() + static_cast<std::ptrdiff_t>(nf));
  p.ids.push_back(TokenVocab::kSep);
  p.segments.resize(p.ids.size(), 1);
  return p;
}

inline EncodedPair encode_pair(std::span<const std::size_t> question, std::span<const std::size_t> fact,
                               const ModelConfig& config) {
  return encode_pair(question, fact, config.max_tokens);
}

// Collects attention probability matrices during a forward pass.
template <class T>
struct AttentionProbe {
  std::vector<nn::Tensor<T>> probabilities;
};

// Row range [begin, begin + length) of one sequence inside a stacked batch.
struct SeqSpan {
  std::size_t begin;
  std::size_t length;
};

template <class T>
struct LayerParams {
  // No key bias: it adds a per-row constant to the attention logits, which
  // softmax ignores, so its gradient is identically zero.
  nn::Tensor<T> wq, bq, wk, wv, bv, wo, bo;
  nn::Tensor<T> ln1_gain, ln1_bias;
  nn::Tensor<T> w1, b1, w2, b2;
  nn::Tensor<T> ln2_gain, ln2_bias;
};

template <class T>
struct LstmParams {
  nn::Tensor<T> wx, wh, b;  // gate order: input, forget, cell, output
};

template <class T>
struct AdapterParams {
  nn::Tensor<T> down_w, down_b;
  std::vector<LstmParams<T>> lstm;
  nn::Tensor<T> up_w, up_b;
};

template <class T>
nn::Tensor<T> linear(const nn::Tensor<T>& x, const nn::Tensor<T>& w, const nn::Tensor<T>& b) {
  return nn::add(nn::matmul(x, w), b);
}

// Post-norm encoder layer on stacked sequences (rows x H). Attention never
// crosses sequence boundaries.
template <class T>
nn::Tensor<T> transformer_layer(const nn::Tensor<T>& x, const LayerParams<T>& p, std::span<const SeqSpan> seqs,
                                std::size_t heads, AttentionProbe<T>* probe = nullptr) {
  using nn::Tensor;
  const std::size_t hidden = x.cols();
  if (p.wq.rows() != hidden) throw nn::ShapeError("transformer_layer: input width " + std::to_string(hidden) +
                                                  " does not match weights " + nn::shape_str(p.wq.shape()));
  const std::size_t dh = hidden / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  const auto q = linear(x, p.wq, p.bq);
  const auto k = nn::matmul(x, p.wk);
  const auto v = linear(x, p.wv, p.bv);
  std::vector<Tensor<T>> qh, kh, vh;
  for (std::size_t h = 0; h < heads; ++h) {
    qh.push_back(nn::slice(q, 1, h * dh, (h + 1) * dh));
    kh.push_back(nn::slice(k, 1, h * dh, (h + 1) * dh));
    vh.push_back(nn::slice(v, 1, h * dh, (h + 1) * dh));
  }
  std::vector<Tensor<T>> per_seq;
  per_seq.reserve(seqs.size());
  for (const auto& s : seqs) {
    std::vector<Tensor<T>> head_out;
    for (std::size_t h = 0; h < heads; ++h) {
      const auto qs = nn::slice(qh[h], 0, s.begin, s.begin + s.length);
      const auto ks = nn::slice(kh[h], 0, s.begin, s.begin + s.length);
      const auto vs = nn::slice(vh[h], 0, s.begin, s.begin + s.length);
      const auto att = nn::softmax_rows(nn::scale(nn::matmul(qs, nn::transpose(ks)), inv_sqrt));
      if (probe) probe->probabilities.push_back(att);
      head_out.push_back(nn::matmul(att, vs));
    }
    per_seq.push_back(heads == 1 ? head_out.front() : nn::concat(head_out, 1));
  }
  const auto attended = per_seq.size() == 1 ? per_seq.front() : nn::concat(per_seq, 0);
  auto h1 = nn::add(x, linear(attended, p.wo, p.bo));
  h1 = nn::add(nn::mul(nn::layer_norm(h1), p.ln1_gain), p.ln1_bias);
  const auto ff = linear(nn::gelu(linear(h1, p.w1, p.b1)), p.w2, p.b2);
  auto h2 = nn::add(h1, ff);
  return nn::add(nn::mul(nn::layer_norm(h2), p.ln2_gain), p.ln2_bias);
}

template <class T>
nn::Tensor<T> transformer_layer(const nn::Tensor<T>& x, const LayerParams<T>& p, std::size_t heads,
                                AttentionProbe<T>* probe = nullptr) {
  const SeqSpan whole{0, x.rows()};
  return transformer_layer(x, p, std::span<const SeqSpan>(&whole, 1), heads, probe);
}

// Unidirectional LSTM over the rows of `x` (row 0 first); zero initial state.
template <class T>
nn::Tensor<T> lstm_layer(const nn::Tensor<T>& x, const LstmParams<T>& p) {
  using nn::Tensor;
  const std::size_t steps = x.rows();
  const std::size_t d = p.wh.rows();
  const auto pre = linear(x, p.wx, p.b);
  std::vector<Tensor<T>> outputs;
  Tensor<T> h, c;
  for (std::size_t t = 0; t < steps; ++t) {
    auto g = nn::slice(pre, 0, t, t + 1);
    if (t > 0) g = nn::add(g, nn::matmul(h, p.wh));
    const auto gates = nn::sigmoid(g);
    const auto in_gate = nn::slice(gates, 1, 0, d);
    const auto forget_gate = nn::slice(gates, 1, d, 2 * d);
    const auto candidate = nn::tanh(nn::slice(g, 1, 2 * d, 3 * d));
    const auto out_gate = nn::slice(gates, 1, 3 * d, 4 * d);
    c = t > 0 ? nn::add(nn::mul(forget_gate, c), nn::mul(in_gate, candidate)) : nn::mul(in_gate, candidate);
    h = nn::mul(out_gate, nn::tanh(c));
    outputs.push_back(h);
  }
  return outputs.size() == 1 ? outputs.front() : nn::concat(outputs, 0);
}

// up(lstm(down(cls))); the residual is added by the caller.
template <class T>
nn::Tensor<T> adapter_branch(const nn::Tensor<T>& cls, const AdapterParams<T>& p) {
  auto u = linear(cls, p.down_w, p.down_b);
  for (const auto& layer : p.lstm) u = lstm_layer(u, layer);
  return linear(u, p.up_w, p.up_b);
}

// cls (D x H, retrieval order) -> cls + up(lstm(down(cls))).
template <class T>
nn::Tensor<T> lstm_adapter(const nn::Tensor<T>& cls, const AdapterParams<T>& p) {
  return nn::add(cls, adapter_branch(cls, p));
}

template <class T>
class LitModel {
 public:
  LitModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)), params_(seed) {
    config_.validate();
    build();
  }

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  const AdapterParams<T>& adapter(std::size_t i) const { return w_.adapters.at(i); }
  std::size_t adapter_count() const { return w_.adapters.size(); }
  const LayerParams<T>& layer(std::size_t i) const { return w_.layers.at(i); }

  // Logits (D x 1) for one question's candidates, given in retrieval order.
  nn::Tensor<T> forward(std::span<const EncodedPair> docs, AttentionProbe<T>* probe = nullptr) const {
    return forward_with(w_, docs, probe);
  }

  // Logits without recording a graph. Works on detached copies of the
  // weights, so concurrent calls on one model are safe.
  std::vector<double> score(std::span<const EncodedPair> docs) const {
    if (docs.empty()) return {};
    const auto logits = forward_with(frozen(), docs, nullptr);
    return std::vector<double>(logits.data().begin(), logits.data().end());
  }

 private:
  struct Weights {
    nn::Tensor<T> token_emb, pos_emb, seg_emb, emb_ln_gain, emb_ln_bias;
    std::vector<LayerParams<T>> layers;
    std::vector<AdapterParams<T>> adapters;
    nn::Tensor<T> head_w, head_b;
  };

  Weights frozen() const {
    auto d = [](const nn::Tensor<T>& t) { return t.detach(); };
    Weights f;
    f.token_emb = d(w_.token_emb);
    f.pos_emb = d(w_.pos_emb);
    f.seg_emb = d(w_.seg_emb);
    f.emb_ln_gain = d(w_.emb_ln_gain);
    f.emb_ln_bias = d(w_.emb_ln_bias);
    for (const auto& l : w_.layers) {
      f.layers.push_back({d(l.wq), d(l.bq), d(l.wk), d(l.wv), d(l.bv), d(l.wo), d(l.bo), d(l.ln1_gain),
                          d(l.ln1_bias), d(l.w1), d(l.b1), d(l.w2), d(l.b2), d(l.ln2_gain), d(l.ln2_bias)});
    }
    for (const auto& a : w_.adapters) {
      AdapterParams<T> c{d(a.down_w), d(a.down_b), {}, d(a.up_w), d(a.up_b)};
      for (const auto& l : a.lstm) c.lstm.push_back({d(l.wx), d(l.wh), d(l.b)});
      f.adapters.push_back(std::move(c));
    }
    f.head_w = d(w_.head_w);
    f.head_b = d(w_.head_b);
    return f;
  }

  nn::Tensor<T> forward_with(const Weights& w, std::span<const EncodedPair> docs, AttentionProbe<T>* probe) const {
    using nn::Tensor;
    if (docs.empty()) return Tensor<T>::zeros({0, 1});
    if (docs.size() > config_.docs_per_question)
      throw InvariantError("model_forward: " + std::to_string(docs.size()) + " documents exceed docs_per_question=" +
                           std::to_string(config_.docs_per_question));
    std::vector<std::size_t> ids, positions, segments, cls_rows;
    std::vector<SeqSpan> seqs;
    for (const auto& d : docs) {
      if (d.ids.empty() || d.ids.size() > config_.max_tokens || d.segments.size() != d.ids.size())
        throw InvariantError("model_forward: malformed encoded pair");
      cls_rows.push_back(ids.size());
      seqs.push_back({ids.size(), d.ids.size()});
      for (std::size_t i = 0; i < d.ids.size(); ++i) {
        if (d.ids[i] >= config_.vocab_size) throw InvariantError("model_forward: token id out of vocabulary");
        ids.push_back(d.ids[i]);
        positions.push_back(i);
        segments.push_back(d.segments[i]);
      }
    }
    const std::size_t rows = ids.size();
    auto x = nn::add(nn::add(nn::embedding_lookup(w.token_emb, ids), nn::embedding_lookup(w.pos_emb, positions)),
                     nn::embedding_lookup(w.seg_emb, segments));
    x = nn::add(nn::mul(nn::layer_norm(x), w.emb_ln_gain), w.emb_ln_bias);

    for (std::size_t l = 0; l < config_.layers; ++l) {
      x = transformer_layer(x, w.layers[l], seqs, config_.heads, probe);
      const bool adapt =
          config_.variant == Variant::lit || (config_.variant == Variant::lstm_after && l + 1 == config_.layers);
      if (adapt) {
        const auto& ad = w.adapters[config_.variant == Variant::lit ? l : 0];
        const auto cls = nn::gather_rows(x, cls_rows);
        x = nn::add(x, nn::scatter_rows(adapter_branch(cls, ad), cls_rows, rows));
      }
    }
    const auto cls = nn::gather_rows(x, cls_rows);
    return linear(cls, w.head_w, w.head_b);
  }

  void build() {
    using nn::Init;
    const auto H = config_.hidden;
    const auto F = config_.ffn_dim;
    const auto A = config_.adapter_dim;
    w_.token_emb = params_.add("embed.token", {config_.vocab_size, H}, Init::embedding);
    w_.pos_emb = params_.add("embed.position", {config_.max_tokens, H}, Init::embedding);
    w_.seg_emb = params_.add("embed.segment", {2, H}, Init::embedding);
    w_.emb_ln_gain = params_.add("embed.ln.gain", {1, H}, Init::ones);
    w_.emb_ln_bias = params_.add("embed.ln.bias", {1, H}, Init::zeros);
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const auto pre = "layer" + std::to_string(l) + ".";
      LayerParams<T> p;
      p.wq = params_.add(pre + "attn.wq", {H, H}, Init::fan_in_uniform);
      p.bq = params_.add(pre + "attn.bq", {1, H}, Init::zeros);
      p.wk = params_.add(pre + "attn.wk", {H, H}, Init::fan_in_uniform);
      p.wv = params_.add(pre + "attn.wv", {H, H}, Init::fan_in_uniform);
      p.bv = params_.add(pre + "attn.bv", {1, H}, Init::zeros);
      p.wo = params_.add(pre + "attn.wo", {H, H}, Init::fan_in_uniform);
      p.bo = params_.add(pre + "attn.bo", {1, H}, Init::zeros);
      p.ln1_gain = params_.add(pre + "ln1.gain", {1, H}, Init::ones);
      p.ln1_bias = params_.add(pre + "ln1.bias", {1, H}, Init::zeros);
      p.w1 = params_.add(pre + "ffn.w1", {H, F}, Init::fan_in_uniform);
      p.b1 = params_.add(pre + "ffn.b1", {1, F}, Init::zeros);
      p.w2 = params_.add(pre + "ffn.w2", {F, H}, Init::fan_in_uniform);
      p.b2 = params_.add(pre + "ffn.b2", {1, H}, Init::zeros);
      p.ln2_gain = params_.add(pre + "ln2.gain", {1, H}, Init::ones);
      p.ln2_bias = params_.add(pre + "ln2.bias", {1, H}, Init::zeros);
      w_.layers.push_back(std::move(p));
    }
    std::size_t n_adapters = 0;
    if (config_.variant == Variant::lit) n_adapters = config_.layers;
    if (config_.variant == Variant::lstm_after) n_adapters = 1;
    for (std::size_t a = 0; a < n_adapters; ++a) {
      const auto pre = "adapter" + std::to_string(a) + ".";
      AdapterParams<T> p;
      p.down_w = params_.add(pre + "down.w", {H, A}, Init::fan_in_uniform);
      p.down_b = params_.add(pre + "down.b", {1, A}, Init::zeros);
      for (std::size_t k = 0; k < config_.lstm_layers; ++k) {
        const auto lp = pre + "lstm" + std::to_string(k) + ".";
        LstmParams<T> lstm;
        lstm.wx = params_.add(lp + "wx", {A, 4 * A}, Init::fan_in_uniform);
        lstm.wh = params_.add(lp + "wh", {A, 4 * A}, Init::fan_in_uniform);
        lstm.b = params_.add(lp + "b", {1, 4 * A}, Init::zeros);
        p.lstm.push_back(std::move(lstm));
      }
      p.up_w = params_.add(pre + "up.w", {A, H}, Init::zeros);
      p.up_b = params_.add(pre + "up.b", {1, H}, Init::zeros);
      w_.adapters.push_back(std::move(p));
    }
    w_.head_w = params_.add("head.w", {H, 1}, Init::fan_in_uniform);
    w_.head_b = params_.add("head.b", {1, 1}, Init::zeros);
  }

  ModelConfig config_;
  nn::ParameterSet<T> params_;
  Weights w_;
};

struct ScoreBatch {
  std::string qid;
  std::vector<std::string> uids;  // retrieval order
  std::vector<double> logits;
};

template <class T>
ScoreBatch model_forward(const LitModel<T>& model, std::string qid, std::vector<std::string> uids,
                         std::span<const EncodedPair> docs) {
  if (uids.size() != docs.size()) throw InvariantError("model_forward: uid/document count mismatch");
  ScoreBatch b{std::move(qid), std::move(uids), {}};
  if (!docs.empty()) b.logits = model.score(docs);
  return b;
}

// Maps fact UIDs and question text to model token ids.
class PairEncoder {
 public:
  PairEncoder(TokenVocab vocab, std::size_t max_tokens) : vocab_(std::move(vocab)), max_tokens_(max_tokens) {}

  void add_fact(const std::string& uid, const TokenList& tokens) { facts_[uid] = vocab_.ids(tokens); }

  EncodedPair encode(const std::vector<std::size_t>& question_ids, const std::string& uid) const {
    const auto it = facts_.find(uid);
    if (it == facts_.end()) throw InvariantError("unknown fact UID " + uid);
    return encode_pair(question_ids, it->second, max_tokens_);
  }
  std::vector<std::size_t> question_ids(const TokenList& tokens) const { return vocab_.ids(tokens); }
  const TokenVocab& vocab() const { return vocab_; }

 private:
  TokenVocab vocab_;
  std::size_t max_tokens_;
  std::unordered_map<std::string, std::vector<std::size_t>> facts_;
};

// Re-orders the first K entries of `ranking` by model logit (ties keep
// retrieval order). Entries past K keep their order and get scores strictly
// below the re-ranked block.
inline RankedList rerank_with_logits(const RankedList& ranking, std::size_t k, const std::vector<double>& logits) {
  k = std::min(k, ranking.entries.size());
  if (logits.size() != k) throw InvariantError("rerank: expected " + std::to_string(k) + " logits");
  if (k == 0) return ranking;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return logits[a] > logits[b]; });
  RankedList out{ranking.qid, {}};
  out.entries.reserve(ranking.entries.size());
  for (const auto i : order) out.entries.push_back({ranking.entries[i].uid, logits[i]});
  const double floor = logits[order.back()];
  for (std::size_t i = k; i < ranking.entries.size(); ++i)
    out.entries.push_back({ranking.entries[i].uid, floor - 1.0 - static_cast<double>(i - k)});
  return out;
}

template <class T>
RankedList rerank(const LitModel<T>& model, const PairEncoder& encoder, const std::vector<std::size_t>& question_ids,
                  const RankedList& ranking, std::size_t k) {
  k = std::min(k, ranking.entries.size());
  if (k == 0) return ranking;
  std::vector<EncodedPair> docs;
  docs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) docs.push_back(encoder.encode(question_ids, ranking.entries[i].uid));
  return rerank_with_logits(ranking, k, model.score(docs));
}

}  // namespace litrank
