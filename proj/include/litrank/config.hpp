#pragma once
// Run configuration. A flat key=value file, with command-line flags applied on
// top. Every key is also a flag of the same name (--key value).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "litrank/common.hpp"
#include "litrank/lit_encoder.hpp"
#include "litrank/ranking_losses.hpp"
#include "litrank/sparse_retrieval.hpp"
#include "litrank/synthetic.hpp"
#include "litrank/training.hpp"

namespace litrank {

inline constexpr const char* kDataRootEnv = "LITRANK_DATA_ROOT";

struct ExperimentConfig {
  // locations
  std::string data_root;
  std::string work_dir = "litrank-work";
  std::string tables_dir = "tables";
  std::string questions_file = "questions.{split}.tsv";
  std::string lemma_file;  // empty: bundled resources
  std::string stopword_file;
  std::string split = "dev";

  // retrieval
  std::string method = "ibm25";
  double k1 = 1.2;
  double b = 0.75;
  double lambda = 0.5;
  int start_exponent = 0;
  std::string lambda_grid;  // e.g. "0.1,0.2,...": tuned on `split` when set
  std::size_t rerank_k = 128;

  // model
  Variant variant = Variant::lit;
  std::size_t layers = 3;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t adapter_dim = 16;
  std::size_t ffn_dim = 128;
  std::size_t max_tokens = 64;

  // training
  std::string task = "synthetic";
  LossKind loss = LossKind::bce;
  std::size_t ap_bins = 25;
  double lr = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;

  // synthetic task
  std::size_t synth_queries = 400;
  std::size_t synth_test_queries = 200;
  std::size_t synth_docs = 16;
  std::size_t synth_topics = 8;
  std::size_t synth_keys = 8;
  std::size_t synth_fillers = 32;
  std::size_t synth_fillers_per_doc = 2;
  double synth_duplicate_rate = 0.5;
  double synth_on_topic_rate = 0.5;

  // loss comparison
  std::string losses = "bce,lambda,ap";
  std::string seeds = "1,2,3";

  // artifacts consumed by later commands
  std::string rankings;
  std::string checkpoint;
  std::string predictions;

  struct Field {
    const char* name;
    const char* help;
    bool is_path;  // excluded from the config hash
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
  };

  static const std::vector<Field>& fields();

  void set(const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
      if (key == f.name) {
        try {
          f.set(*this, value);
        } catch (const InvariantError&) {
          throw;
        } catch (const std::exception&) {
          throw InvariantError("bad value '" + value + "' for " + key);
        }
        return;
      }
    }
    throw InvariantError("unknown config key '" + key + "'");
  }

  std::string get(const std::string& key) const {
    for (const auto& f : fields())
      if (key == f.name) return f.get(*this);
    throw InvariantError("unknown config key '" + key + "'");
  }

  // Non-path settings, one "key=value" per line in field order.
  std::string serialize(bool include_paths = false) const {
    std::ostringstream out;
    for (const auto& f : fields())
      if (include_paths || !f.is_path) out << f.name << '=' << f.get(*this) << '\n';
    return out.str();
  }

  std::map<std::string, std::string> settings(bool include_paths = false) const {
    std::map<std::string, std::string> out;
    for (const auto& f : fields())
      if (include_paths || !f.is_path) out[f.name] = f.get(*this);
    return out;
  }

  std::string hash() const { return hash_hex(serialize(false)); }

  void load_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path.string());
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path.string())) {
      ++lineno;
      const auto line = std::string(trim(raw));
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InvariantError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
      set(std::string(trim(std::string_view(line).substr(0, eq))), std::string(trim(std::string_view(line).substr(eq + 1))));
    }
  }

  // Data root from the environment unless already set (flags win).
  void apply_env() {
    if (!data_root.empty()) return;
    if (const char* env = std::getenv(kDataRootEnv); env && *env) data_root = env;
  }

  std::filesystem::path tables_path() const { return std::filesystem::path(data_root) / tables_dir; }

  std::filesystem::path questions_path(const std::string& which) const {
    auto name = questions_file;
    if (const auto pos = name.find("{split}"); pos != std::string::npos) name.replace(pos, 7, which);
    return std::filesystem::path(data_root) / name;
  }

  ModelConfig model_config(std::size_t vocab_size, std::size_t docs_per_question) const {
    ModelConfig m;
    m.variant = variant;
    m.layers = layers;
    m.hidden = hidden;
    m.heads = heads;
    m.adapter_dim = adapter_dim;
    m.ffn_dim = ffn_dim;
    m.max_tokens = max_tokens;
    m.docs_per_question = docs_per_question;
    m.vocab_size = vocab_size;
    return m;
  }

  SyntheticSizes synthetic_sizes(bool test_stream = false) const {
    SyntheticSizes s;
    s.queries = test_stream ? synth_test_queries : synth_queries;
    s.docs_per_query = synth_docs;
    s.topics = synth_topics;
    s.keys = synth_keys;
    s.fillers = synth_fillers;
    s.fillers_per_doc = synth_fillers_per_doc;
    s.duplicate_rate = synth_duplicate_rate;
    s.on_topic_rate = synth_on_topic_rate;
    return s;
  }

  TrainConfig train_config(LossKind which, std::uint64_t run_seed) const {
    TrainConfig t;
    t.loss = which;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.lr = lr;
    t.seed = run_seed;
    t.ap_bins = ap_bins;
    return t;
  }

  Bm25Params bm25() const { return {k1, b}; }
  IterConfig iter() const { return {lambda, start_exponent}; }

  std::vector<LossKind> loss_list() const {
    std::vector<LossKind> out;
    for (const auto& s : litrank::split(losses, ','))
      if (!trim(s).empty()) out.push_back(parse_loss_kind(trim(s)));
    return out;
  }

  std::vector<std::uint64_t> seed_list() const {
    std::vector<std::uint64_t> out;
    for (const auto& s : litrank::split(seeds, ','))
      if (!trim(s).empty()) out.push_back(std::stoull(std::string(trim(s))));
    return out;
  }

  std::vector<double> lambda_values() const {
    std::vector<double> out;
    for (const auto& s : litrank::split(lambda_grid, ','))
      if (!trim(s).empty()) out.push_back(std::stod(std::string(trim(s))));
    return out;
  }

  // Cross-field checks shared by every command.
  void validate() const {
    if (k1 < 0.0) throw InvariantError("k1 must be >= 0");
    if (b < 0.0 || b > 1.0) throw InvariantError("b must lie in [0,1]");
    iter().validate();
    for (const auto l : lambda_values())
      if (!(l >= 0.0 && l <= 1.0)) throw InvariantError("lambda_grid values must lie in [0,1]");
    if (method != "bm25" && method != "ibm25") throw InvariantError("method must be bm25 or ibm25");
    if (task != "synthetic" && task != "worldtree") throw InvariantError("task must be synthetic or worldtree");
    model_config(4, 1).validate();
    train_config(loss, seed).validate();
    synthetic_sizes().validate();
    if (synth_test_queries == 0) throw InvariantError("synth_test_queries must be >= 1");
    if (loss_list().empty()) throw InvariantError("losses must name at least one loss");
    if (seed_list().empty()) throw InvariantError("seeds must name at least one seed");
  }
};

namespace config_detail {

inline std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

inline std::size_t to_size(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size() || s.front() == '-') throw std::invalid_argument(s);
  return static_cast<std::size_t>(v);
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(s);
  return v;
}

}  // namespace config_detail

inline const std::vector<ExperimentConfig::Field>& ExperimentConfig::fields() {
  using C = ExperimentConfig;
  using namespace config_detail;
#define LITRANK_STR(name, path, help) \
  {#name, help, path, [](const C& c) { return c.name; }, [](C& c, const std::string& v) { c.name = v; }}
#define LITRANK_SIZE(name, help) \
  {#name, help, false, [](const C& c) { return std::to_string(c.name); }, [](C& c, const std::string& v) { c.name = to_size(v); }}
#define LITRANK_REAL(name, help) \
  {#name, help, false, [](const C& c) { return fmt(c.name); }, [](C& c, const std::string& v) { c.name = to_double(v); }}
  static const std::vector<Field> table = {
      LITRANK_STR(data_root, true, "corpus root (tables + question files)"),
      LITRANK_STR(work_dir, true, "directory for artifacts and manifests"),
      LITRANK_STR(tables_dir, false, "fact table directory, relative to data_root"),
      LITRANK_STR(questions_file, false, "question file pattern relative to data_root; {split} is substituted"),
      LITRANK_STR(lemma_file, true, "lemma table (surface<TAB>lemma); empty for the bundled one"),
      LITRANK_STR(stopword_file, true, "stopword list; empty for the bundled one"),
      LITRANK_STR(split, false, "train, dev or test"),
      LITRANK_STR(method, false, "bm25 or ibm25"),
      LITRANK_REAL(k1, "BM25 k1"),
      LITRANK_REAL(b, "BM25 b"),
      LITRANK_REAL(lambda, "I-BM25 down-scale factor"),
      {"start_exponent", "I-BM25 first batch is 2^start_exponent facts", false,
       [](const C& c) { return std::to_string(c.start_exponent); },
       [](C& c, const std::string& v) { c.start_exponent = static_cast<int>(to_size(v)); }},
      LITRANK_STR(lambda_grid, false, "comma-separated lambda values to tune over"),
      LITRANK_SIZE(rerank_k, "candidates re-ranked per question"),
      {"variant", "isolated, lstm_after or lit", false, [](const C& c) { return std::string(to_string(c.variant)); },
       [](C& c, const std::string& v) { c.variant = parse_variant(v); }},
      LITRANK_SIZE(layers, "transformer layers"),
      LITRANK_SIZE(hidden, "hidden width"),
      LITRANK_SIZE(heads, "attention heads"),
      LITRANK_SIZE(adapter_dim, "adapter bottleneck width"),
      LITRANK_SIZE(ffn_dim, "feed-forward width"),
      LITRANK_SIZE(max_tokens, "tokens per (question, fact) pair"),
      LITRANK_STR(task, false, "synthetic or worldtree"),
      {"loss", "bce, lambda or ap", false, [](const C& c) { return std::string(to_string(c.loss)); },
       [](C& c, const std::string& v) { c.loss = parse_loss_kind(v); }},
      LITRANK_SIZE(ap_bins, "histogram bins of the AP loss"),
      LITRANK_REAL(lr, "Adam learning rate"),
      LITRANK_SIZE(epochs, "training epochs"),
      LITRANK_SIZE(batch_size, "questions per optimizer step"),
      {"seed", "run seed", false, [](const C& c) { return std::to_string(c.seed); },
       [](C& c, const std::string& v) { c.seed = to_size(v); }},
      LITRANK_SIZE(synth_queries, "synthetic training questions"),
      LITRANK_SIZE(synth_test_queries, "synthetic held-out questions"),
      LITRANK_SIZE(synth_docs, "synthetic candidates per question"),
      LITRANK_SIZE(synth_topics, "synthetic topics"),
      LITRANK_SIZE(synth_keys, "synthetic content keys"),
      LITRANK_SIZE(synth_fillers, "synthetic filler vocabulary"),
      LITRANK_SIZE(synth_fillers_per_doc, "filler tokens per synthetic candidate"),
      LITRANK_REAL(synth_duplicate_rate, "probability an on-topic candidate repeats an earlier key"),
      LITRANK_REAL(synth_on_topic_rate, "probability a candidate is on-topic"),
      LITRANK_STR(losses, false, "losses compared by compare-losses"),
      LITRANK_STR(seeds, false, "seeds used by compare-losses"),
      LITRANK_STR(rankings, true, "ranking file consumed by train/rerank"),
      LITRANK_STR(checkpoint, true, "model checkpoint"),
      LITRANK_STR(predictions, true, "prediction file consumed by evaluate"),
  };
#undef LITRANK_STR
#undef LITRANK_SIZE
#undef LITRANK_REAL
  return table;
}

}  // namespace litrank
