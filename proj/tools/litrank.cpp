// litrank command-line front end.
//
// Exit codes: 0 ok, 1 unexpected error, 2 missing input, 3 invariant violation.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "litrank/config.hpp"
#include "litrank/corpus_io.hpp"
#include "litrank/experiment.hpp"
#include "litrank/gradient_suite.hpp"
#include "litrank/manifest.hpp"
#include "litrank/metrics_eval.hpp"
#include "litrank/pipeline.hpp"
#include "litrank/sparse_retrieval.hpp"

namespace fs = std::filesystem;
using namespace litrank;

namespace {

constexpr int kExitMissingInput = 2;
constexpr int kExitInvariant = 3;

std::string fixed(double v, int digits = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

std::string exact(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work(const ExperimentConfig& cfg) { return fs::path(cfg.work_dir); }

void report_warnings(const Diagnostics& diag) {
  const std::size_t shown = std::min<std::size_t>(diag.warnings.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) std::cerr << "warning: " << diag.warnings[i] << '\n';
  if (diag.warnings.size() > shown) std::cerr << "(" << diag.warnings.size() - shown << " more warnings)\n";
}

RunManifest manifest_for(const std::string& command, const ExperimentConfig& cfg) {
  return RunManifest(command, cfg.settings(), cfg.hash(), cfg.seed);
}

fs::path default_ranking(const ExperimentConfig& cfg, const std::string& split_name) {
  return work(cfg) / ("retrieve." + split_name + "." + cfg.method + ".tsv");
}

// ---------------------------------------------------------------------------

int cmd_ingest(const ExperimentConfig& cfg) {
  if (cfg.data_root.empty())
    throw InputError(std::string("no data root: pass --data-root or set ") + kDataRootEnv);
  const auto tables = cfg.tables_path();
  if (!fs::is_directory(tables)) throw InputError("fact table directory not found: " + tables.string());
  fs::create_directories(work(cfg));
  auto manifest = manifest_for("ingest", cfg);
  Diagnostics diag;

  const auto facts = load_fact_tables(tables, diag);
  if (facts.empty()) throw InputError("no facts found under " + tables.string());
  for (const auto& entry : fs::directory_iterator(tables))
    if (entry.path().extension() == ".tsv") manifest.input(entry.path(), file_hash(entry.path()));

  const auto facts_path = work(cfg) / "facts.tsv";
  write_fact_dump(facts_path, facts);
  const auto corpus_hash = file_hash(facts_path);
  manifest.output(facts_path, seal_artifact(facts_path, {"facts", cfg.hash(), "", corpus_hash, ""}));

  const auto res = load_resources(cfg);
  const auto index = build_index(facts, res, cfg.bm25());
  const auto index_path = work(cfg) / "index.bin";
  index.save(index_path);
  manifest.output(index_path, seal_artifact(index_path, {"index", cfg.hash(), "", corpus_hash, ""}));

  std::size_t splits_found = 0;
  for (const auto s : {Split::train, Split::dev, Split::test}) {
    const auto qpath = cfg.questions_path(to_string(s));
    if (!fs::exists(qpath)) {
      std::cerr << "note: no " << to_string(s) << " questions at " << qpath << '\n';
      continue;
    }
    ++splits_found;
    auto questions = load_questions(qpath, s, diag);
    const auto dropped = filter_gold(questions, facts, diag);
    manifest.input(qpath, file_hash(qpath));
    const auto out = work(cfg) / (std::string("queries.") + to_string(s) + ".tsv");
    write_queries(out, make_queries(questions, diag));
    manifest.output(out, seal_artifact(out, {"queries", cfg.hash(), "", corpus_hash, to_string(s)}));
    manifest.result(std::string("questions.") + to_string(s), std::to_string(questions.size()));
    manifest.result(std::string("unknown_gold.") + to_string(s), std::to_string(dropped));
    std::cout << to_string(s) << ": " << questions.size() << " questions, " << dropped
              << " gold references to unknown facts dropped\n";
  }
  if (splits_found == 0) throw InputError("no question files found under " + cfg.data_root);
  manifest.result("facts", std::to_string(facts.size()));
  manifest.result("terms", std::to_string(index.vocabulary().size()));
  manifest.result("warnings", std::to_string(diag.warnings.size()));
  manifest.write(work(cfg) / "ingest.manifest");
  report_warnings(diag);
  std::cout << "facts: " << facts.size() << ", terms: " << index.vocabulary().size() << ", corpus " << corpus_hash
            << '\n';
  return 0;
}

int cmd_retrieve(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto index_path = work(cfg) / "index.bin";
  const auto qpath = work(cfg) / ("queries." + cfg.split + ".tsv");
  const auto index_meta = open_artifact(index_path, "index");
  const auto query_meta = open_artifact(qpath, "queries");
  if (query_meta.corpus_hash != index_meta.corpus_hash)
    throw InvariantError("queries and index were ingested from different corpora");
  const auto index = SparseIndex::load(index_path);
  if (index.params().k1 != cfg.k1 || index.params().b != cfg.b)
    throw InvariantError("index was built with k1=" + exact(index.params().k1) + " b=" + exact(index.params().b) +
                         "; re-run ingest with the requested values");
  const auto queries = read_queries(qpath);
  const auto res = load_resources(cfg);
  const auto method = parse_method(cfg.method);
  auto manifest = manifest_for("retrieve", cfg);
  manifest.input(index_path, index_meta.content_hash);
  manifest.input(qpath, query_meta.content_hash);

  const auto golds = gold_map(queries);
  const bool has_gold = std::any_of(queries.begin(), queries.end(), [](const auto& q) { return !q.gold.empty(); });
  IterConfig iter = cfg.iter();
  if (method == Method::ibm25 && !cfg.lambda_values().empty()) {
    if (!has_gold) throw InputError("lambda tuning needs gold explanations for split " + cfg.split);
    const auto search = tune_lambda(index, queries, res, cfg.lambda_values(), cfg.start_exponent);
    for (const auto& [l, m] : search.trials) {
      std::cout << "lambda " << fixed(l, 2) << "  MAP " << fixed(m) << '\n';
      manifest.result("grid.lambda=" + exact(l), exact(m));
    }
    iter.downscale = search.best;
    std::cout << "selected lambda " << fixed(iter.downscale, 2) << '\n';
  }
  manifest.result("lambda", exact(iter.downscale));

  ScoringStats stats;
  const auto lists = retrieve_all(index, queries, res, method, iter, &stats);
  const auto out = default_ranking(cfg, cfg.split);
  write_predictions(out, lists);
  manifest.output(out, seal_artifact(out, {"ranking", cfg.hash(), "", index_meta.corpus_hash, cfg.split}));
  const double per_q = queries.empty() ? 0.0 : static_cast<double>(stats.scoring_passes) / queries.size();
  manifest.result("scoring_passes_per_question", exact(per_q));
  std::cout << cfg.method << " on " << cfg.split << ": " << queries.size() << " questions, " << fixed(per_q, 2)
            << " scoring passes per question\n";
  if (has_gold) {
    const auto rep = mean_average_precision(ranking_map(lists), golds);
    manifest.result("map", exact(rep.map));
    for (const auto& [k, r] : rep.recall) manifest.result("recall@" + std::to_string(k), exact(r));
    std::cout << rep.table();
  }
  manifest.write(work(cfg) / ("retrieve." + cfg.split + "." + cfg.method + ".manifest"));
  std::cerr << "retrieve took " << fixed(seconds_since(t0), 1) << " s\n";
  return 0;
}

std::string checkpoint_metadata(const ModelConfig& mc, const ExperimentConfig& cfg, const std::string& corpus_hash) {
  return mc.serialize() + "task=" + cfg.task + "\ncorpus_hash=" + corpus_hash + "\nconfig_hash=" + cfg.hash() + "\n";
}

std::string metadata_value(const std::string& meta, const std::string& key) {
  std::istringstream in(meta);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

int cmd_train(const ExperimentConfig& cfg) {
  fs::create_directories(work(cfg));
  auto manifest = manifest_for("train", cfg);
  const auto ckpt = work(cfg) / "model.ckpt";
  if (cfg.task == "synthetic") {
    const auto run = run_synthetic(cfg, cfg.variant, cfg.loss, cfg.seed, [&](const LitModel<float>& m) {
      save_checkpoint(ckpt, m.params(), checkpoint_metadata(m.config(), cfg, ""));
    });
    manifest.input("synthetic.train", run.train_hash);
    manifest.input("synthetic.test", run.test_hash);
    manifest.output(ckpt, seal_artifact(ckpt, {"checkpoint", cfg.hash(), "", "", "synthetic"}));
    manifest.result("train_map", exact(run.train_map));
    manifest.result("test_map", exact(run.test_map));
    manifest.result("isolated_bound", exact(run.isolated_bound));
    manifest.write(work(cfg) / "train.manifest");
    std::cout << to_string(cfg.variant) << " / " << to_string(cfg.loss) << " seed " << cfg.seed << ": train MAP "
              << fixed(run.train_map) << ", test MAP " << fixed(run.test_map) << " (isolated bound "
              << fixed(run.isolated_bound) << ")\n";
    std::cerr << "train took " << fixed(run.seconds, 1) << " s\n";
    return 0;
  }

  const auto ranking_path = cfg.rankings.empty() ? default_ranking(cfg, "train") : fs::path(cfg.rankings);
  const auto rmeta = open_artifact(ranking_path, "ranking");
  if (rmeta.split != "train") throw InvariantError("training rankings come from split " + rmeta.split);
  const auto qpath = work(cfg) / "queries.train.tsv";
  const auto qmeta = open_artifact(qpath, "queries");
  const auto fmeta = open_artifact(work(cfg) / "facts.tsv", "facts");
  const auto imeta = open_artifact(work(cfg) / "index.bin", "index");
  for (const auto* m : {&qmeta, &fmeta, &imeta})
    if (m->corpus_hash != rmeta.corpus_hash) throw InvariantError("training artifacts come from different corpora");
  const auto res = load_resources(cfg);
  const auto facts = read_fact_dump(work(cfg) / "facts.tsv");
  const auto index = SparseIndex::load(work(cfg) / "index.bin");
  const auto enc = make_encoder(index, facts, res, cfg.max_tokens);
  const auto examples = rerank_examples(read_rankings(ranking_path), read_queries(qpath), enc, res, cfg.rerank_k);
  if (examples.empty()) throw InputError("no training questions with gold explanations");
  const auto mc = cfg.model_config(enc.vocab().size(), cfg.rerank_k);
  LitModel<float> model(mc, cfg.seed);
  train(model, examples, cfg.train_config(cfg.loss, cfg.seed), [&](const EpochStats& s) {
    std::cerr << "epoch " << s.epoch << " loss " << fixed(s.mean_loss) << '\n';
    return false;
  });
  save_checkpoint(ckpt, model.params(), checkpoint_metadata(mc, cfg, rmeta.corpus_hash));
  manifest.input(ranking_path, rmeta.content_hash);
  manifest.input(qpath, qmeta.content_hash);
  manifest.output(ckpt, seal_artifact(ckpt, {"checkpoint", cfg.hash(), "", rmeta.corpus_hash, "train"}));
  const double top_map = evaluate_map(model, examples);
  manifest.result("train_topk_map", exact(top_map));
  manifest.write(work(cfg) / "train.manifest");
  std::cout << "trained on " << examples.size() << " questions; top-" << cfg.rerank_k << " train MAP "
            << fixed(top_map) << '\n';
  return 0;
}

int cmd_rerank(const ExperimentConfig& cfg) {
  const auto ranking_path = cfg.rankings.empty() ? default_ranking(cfg, cfg.split) : fs::path(cfg.rankings);
  const auto rmeta = open_artifact(ranking_path, "ranking");
  if (rmeta.split != cfg.split)
    throw InvariantError("ranking " + ranking_path.string() + " is for split " + rmeta.split);
  auto rankings = read_rankings(ranking_path);
  auto manifest = manifest_for("rerank", cfg);
  manifest.input(ranking_path, rmeta.content_hash);

  if (cfg.rerank_k > 0) {
    const auto ckpt = cfg.checkpoint.empty() ? work(cfg) / "model.ckpt" : fs::path(cfg.checkpoint);
    const auto cmeta = open_artifact(ckpt, "checkpoint");
    const auto ck = nn::read_checkpoint(ckpt);
    if (metadata_value(ck.metadata, "task") != "worldtree")
      throw InvariantError("checkpoint was not trained on a fact corpus");
    if (metadata_value(ck.metadata, "corpus_hash") != rmeta.corpus_hash)
      throw InvariantError("checkpoint and ranking refer to different corpora");
    const auto mc = ModelConfig::deserialize(ck.metadata);
    if (cfg.rerank_k > mc.docs_per_question)
      throw InvariantError("rerank_k=" + std::to_string(cfg.rerank_k) + " exceeds the model's docs_per_question=" +
                           std::to_string(mc.docs_per_question));
    LitModel<float> model(mc, 0);
    nn::load_checkpoint_into(ck, model.params());
    manifest.input(ckpt, cmeta.content_hash);

    const auto res = load_resources(cfg);
    const auto facts = read_fact_dump(work(cfg) / "facts.tsv");
    const auto index = SparseIndex::load(work(cfg) / "index.bin");
    const auto enc = make_encoder(index, facts, res, mc.max_tokens);
    const auto queries = read_queries(work(cfg) / ("queries." + cfg.split + ".tsv"));
    std::map<std::string, std::string> text;
    for (const auto& q : queries) text[q.qid] = q.text;
    for (auto& r : rankings) {
      const auto it = text.find(r.qid);
      if (it == text.end()) throw InvariantError("ranking has unknown question " + r.qid);
      r = rerank(model, enc, enc.question_ids(preprocess(it->second, res)), r, cfg.rerank_k);
    }
  }
  const auto out = work(cfg) / ("rerank." + cfg.split + ".tsv");
  write_predictions(out, rankings);
  manifest.output(out, seal_artifact(out, {"ranking", cfg.hash(), "", rmeta.corpus_hash, cfg.split}));
  manifest.write(work(cfg) / ("rerank." + cfg.split + ".manifest"));
  std::cout << "re-ranked top " << cfg.rerank_k << " of " << rankings.size() << " questions -> " << out.string()
            << '\n';
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  const auto pred = cfg.predictions.empty() ? default_ranking(cfg, cfg.split) : fs::path(cfg.predictions);
  const auto pmeta = open_artifact(pred, "ranking");
  const auto qpath = work(cfg) / ("queries." + cfg.split + ".tsv");
  const auto qmeta = open_artifact(qpath, "queries");
  if (pmeta.split != cfg.split)
    throw InvariantError("predictions were produced for split " + pmeta.split + ", not " + cfg.split);
  if (pmeta.corpus_hash != qmeta.corpus_hash)
    throw InvariantError("predictions and gold come from different corpora");
  const auto queries = read_queries(qpath);
  const bool has_gold = std::any_of(queries.begin(), queries.end(), [](const auto& q) { return !q.gold.empty(); });
  if (!has_gold) throw InputError("split " + cfg.split + " has no gold explanations to score against");
  const auto rep = mean_average_precision(read_predictions(pred), gold_map(queries));

  auto manifest = manifest_for("evaluate", cfg);
  manifest.input(pred, pmeta.content_hash);
  manifest.input(qpath, qmeta.content_hash);
  auto table_path = pred;
  table_path += ".report.txt";
  auto kv_path = pred;
  kv_path += ".report.kv";
  {
    std::ofstream t(table_path, std::ios::binary);
    t << rep.table();
    std::ofstream k(kv_path, std::ios::binary);
    k << rep.key_values();
    if (!t || !k) throw InputError("cannot write report next to " + pred.string());
  }
  manifest.output(table_path, file_hash(table_path));
  manifest.output(kv_path, file_hash(kv_path));
  manifest.result("map", exact(rep.map));
  manifest.write(work(cfg) / ("evaluate." + pred.filename().string() + ".manifest"));
  std::cout << rep.table();
  return 0;
}

int cmd_compare_losses(const ExperimentConfig& cfg, bool existing_only) {
  const auto runs_dir = work(cfg) / "runs";
  fs::create_directories(runs_dir);
  auto manifest = manifest_for("compare-losses", cfg);
  LossTable table(cfg.loss_list(), cfg.seed_list());
  for (const auto loss : table.losses()) {
    for (const auto seed : table.seeds()) {
      auto run_cfg = cfg;
      run_cfg.loss = loss;
      run_cfg.seed = seed;
      const auto file = runs_dir / (std::string(to_string(cfg.variant)) + "-" + to_string(loss) + "-seed" +
                                    std::to_string(seed) + ".kv");
      if (fs::exists(file)) {
        const auto kv = KeyValues::read(file);
        if (kv.get("config_hash") == run_cfg.hash()) {
          table.set(loss, seed, std::stod(kv.get("test_map")));
          manifest.input(file, file_hash(file));
          continue;
        }
      }
      if (existing_only) continue;
      const auto run = run_synthetic(run_cfg, cfg.variant, loss, seed);
      KeyValues kv;
      kv.set("config_hash", run_cfg.hash());
      kv.set("test_map", exact(run.test_map));
      kv.set("train_map", exact(run.train_map));
      kv.write(file);
      manifest.output(file, file_hash(file));
      table.set(loss, seed, run.test_map);
      std::cerr << to_string(loss) << " seed " << seed << ": test MAP " << fixed(run.test_map) << " ("
                << fixed(run.seconds, 1) << " s)\n";
    }
  }
  const auto text = table.render();
  const auto out = work(cfg) / "compare-losses.txt";
  {
    std::ofstream o(out, std::ios::binary);
    o << text;
  }
  manifest.output(out, file_hash(out));
  manifest.result("partial", table.partial() ? "true" : "false");
  manifest.write(work(cfg) / "compare-losses.manifest");
  std::cout << text;
  return 0;
}

int cmd_gradcheck(const ExperimentConfig& cfg) {
  constexpr double kTolerance = 1e-4;
  const auto cases = run_gradient_suite(cfg.seed);
  bool ok = true;
  for (const auto& c : cases) {
    const bool pass = c.result.max_rel_error < kTolerance;
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << std::left << std::setw(24) << c.name << " max rel error "
              << std::scientific << std::setprecision(2) << c.result.max_rel_error << std::defaultfloat << "  ("
              << c.result.coords_checked << " coords)\n";
  }
  if (!fs::exists(work(cfg))) fs::create_directories(work(cfg));
  auto manifest = manifest_for("gradcheck", cfg);
  for (const auto& c : cases) manifest.result(c.name, exact(c.result.max_rel_error));
  manifest.write(work(cfg) / "gradcheck.manifest");
  if (!ok) {
    std::cerr << "gradient check failed (tolerance " << kTolerance << ")\n";
    return kExitInvariant;
  }
  return 0;
}

int cmd_synth(const ExperimentConfig& cfg) {
  fs::create_directories(work(cfg));
  auto manifest = manifest_for("synth", cfg);
  for (const bool test : {false, true}) {
    const auto stream = test ? "test" : "train";
    const auto task = gen_synthetic(cfg.seed, cfg.synthetic_sizes(test), stream);
    const auto out = work(cfg) / (std::string("synthetic.") + stream + ".tsv");
    write_synthetic(out, task);
    manifest.output(out, seal_artifact(out, {"synthetic", cfg.hash(), "", "", stream}));
    manifest.result(std::string(stream) + ".hash", task.hash());
    manifest.result(std::string(stream) + ".isolated_bound", exact(isolated_bound_map(task)));
    manifest.result(std::string(stream) + ".oracle_map", exact(order_aware_oracle_map(task)));
    std::cout << stream << ": " << task.queries.size() << " questions, hash " << task.hash()
              << ", isolated bound " << fixed(isolated_bound_map(task)) << ", order-aware oracle "
              << fixed(order_aware_oracle_map(task)) << '\n';
  }
  manifest.write(work(cfg) / "synth.manifest");
  return 0;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop explanation ranking: sparse retrieval, cross-document re-ranking, evaluation"};
  app.require_subcommand(1);
  std::string config_file;
  bool existing_only = false;
  std::map<std::string, std::string> flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> flags;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "parse fact tables and questions, build the index"},
      {"retrieve", "rank all facts for each question of a split (BM25 or I-BM25)"},
      {"train", "train a re-ranker (synthetic task or fact corpus)"},
      {"rerank", "re-order the top rerank_k facts of a ranking with a trained model"},
      {"evaluate", "score a prediction file against gold explanations"},
      {"compare-losses", "MAP per loss and seed on the synthetic task"},
      {"gradcheck", "finite-difference check of every op, model and loss"},
      {"synth", "write the synthetic cross-document task and its analytic bounds"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "key=value config file; flags override it");
    for (const auto& f : ExperimentConfig::fields()) {
      auto* opt = sub->add_option(flag_name(f.name), flag_values[f.name], f.help);
      flags.emplace_back(f.name, opt);
    }
    if (name == "compare-losses")
      sub->add_flag("--existing-only", existing_only, "only tabulate runs already on disk");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [key, opt] : flags)
      if (opt->count() > 0) cfg.set(key, flag_values[key]);
    cfg.apply_env();
    cfg.validate();

    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "ingest") return cmd_ingest(cfg);
    if (name == "retrieve") return cmd_retrieve(cfg);
    if (name == "train") return cmd_train(cfg);
    if (name == "rerank") return cmd_rerank(cfg);
    if (name == "evaluate") return cmd_evaluate(cfg);
    if (name == "compare-losses") return cmd_compare_losses(cfg, existing_only);
    if (name == "gradcheck") return cmd_gradcheck(cfg);
    if (name == "synth") return cmd_synth(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
