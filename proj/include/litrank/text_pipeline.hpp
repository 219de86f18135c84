#pragma once
// Table-driven tokenization, lemmatization and stopword removal.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/corpus_io.hpp"

namespace litrank {

using TokenList = std::vector<std::string>;

struct TextResources {
  std::unordered_map<std::string, std::string> lemmas;
  std::unordered_set<std::string> stopwords;
  std::size_t min_token_length = 2;

  // Lemma map: "surface<TAB>lemma" lines. Stopwords: one word per line.
  static TextResources load(const std::string& lemma_path, const std::string& stopword_path) {
    TextResources r;
    for (const auto& line : read_lines(lemma_path)) {
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw InputError(lemma_path + ": malformed lemma line '" + line + "'");
      r.lemmas.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    for (const auto& line : read_lines(stopword_path)) {
      const auto w = trim(line);
      if (!w.empty() && w.front() != '#') r.stopwords.emplace(w);
    }
    return r;
  }

  static TextResources load_default() {
#ifdef LITRANK_DATA_DIR
    return load(std::string(LITRANK_DATA_DIR) + "/lemma_map.tsv", std::string(LITRANK_DATA_DIR) + "/stopwords.txt");
#else
    throw InputError("no default resource directory compiled in");
#endif
  }
};

inline bool is_token_char(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

// lowercase -> split on non-alphanumerics -> lemma lookup -> drop stopwords and short tokens
inline TokenList preprocess(std::string_view text, const TextResources& res) {
  TokenList out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    const auto it = res.lemmas.find(cur);
    const std::string& lemma = it == res.lemmas.end() ? cur : it->second;
    if (lemma.size() >= res.min_token_length && !res.stopwords.contains(cur) && !res.stopwords.contains(lemma))
      out.push_back(lemma);
    cur.clear();
  };
  for (const char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (is_token_char(c)) {
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

inline std::string join(const TokenList& tokens, char sep = ' ') {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += sep;
    out += t;
  }
  return out;
}

class Vocabulary {
 public:
  using TermId = std::uint32_t;

  // Adds a term if unseen; ids are handed out densely in first-seen order.
  TermId intern(const std::string& term) {
    const auto [it, inserted] = term_to_id_.emplace(term, static_cast<TermId>(terms_.size()));
    if (inserted) {
      terms_.push_back(term);
      doc_freq_.push_back(0);
    }
    return it->second;
  }

  std::optional<TermId> find(const std::string& term) const {
    const auto it = term_to_id_.find(term);
    if (it == term_to_id_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& term(TermId id) const { return terms_.at(id); }
  std::uint32_t doc_freq(TermId id) const { return doc_freq_.at(id); }
  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }

  void add_document(const TokenList& tokens) {
    std::unordered_set<TermId> seen;
    for (const auto& t : tokens) seen.insert(intern(t));
    for (const auto id : seen) ++doc_freq_[id];
  }

  // Restores a serialized vocabulary; ids follow `terms` order.
  static Vocabulary from_parts(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq) {
    if (terms.size() != doc_freq.size()) throw InputError("vocabulary terms/doc_freq size mismatch");
    Vocabulary v;
    v.terms_ = std::move(terms);
    v.doc_freq_ = std::move(doc_freq);
    for (std::size_t i = 0; i < v.terms_.size(); ++i) {
      if (!v.term_to_id_.emplace(v.terms_[i], static_cast<TermId>(i)).second)
        throw InputError("vocabulary has duplicate term " + v.terms_[i]);
    }
    return v;
  }

 private:
  std::unordered_map<std::string, TermId> term_to_id_;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
};

inline Vocabulary build_vocabulary(const std::vector<TokenList>& fact_tokens) {
  Vocabulary v;
  for (const auto& tokens : fact_tokens) v.add_document(tokens);
  return v;
}

inline std::vector<TokenList> preprocess_facts(const FactStore& facts, const TextResources& res) {
  std::vector<TokenList> out;
  out.reserve(facts.size());
  for (const auto& f : facts.facts()) out.push_back(preprocess(f.text, res));
  return out;
}

inline Vocabulary build_vocabulary(const FactStore& facts, const TextResources& res) {
  return build_vocabulary(preprocess_facts(facts, res));
}

}  // namespace litrank
