#pragma once
// Synthetic training runs and the loss comparison table.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "litrank/config.hpp"
#include "litrank/lit_encoder.hpp"
#include "litrank/synthetic.hpp"
#include "litrank/training.hpp"

namespace litrank {

struct SyntheticRun {
  Variant variant = Variant::lit;
  LossKind loss = LossKind::bce;
  std::uint64_t seed = 0;
  double test_map = 0.0;
  double train_map = 0.0;
  double isolated_bound = 0.0;
  std::size_t epochs_run = 0;
  double seconds = 0.0;
  std::string train_hash;
  std::string test_hash;
};

struct SyntheticData {
  SyntheticTask train_task, test_task;
  std::vector<TrainingExample> train, test;
};

inline SyntheticData make_synthetic_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  SyntheticData d{gen_synthetic(seed, cfg.synthetic_sizes(false), "train"),
                  gen_synthetic(seed, cfg.synthetic_sizes(true), "test"), {}, {}};
  d.train = to_examples(d.train_task, cfg.max_tokens);
  d.test = to_examples(d.test_task, cfg.max_tokens);
  return d;
}

// Trains one model on the seed's training stream and scores the held-out
// stream. `keep` sees the trained model before it is destroyed.
// `stop_at_train_map` > 0 stops as soon as training MAP reaches it.
inline SyntheticRun run_synthetic(const ExperimentConfig& cfg, Variant variant, LossKind loss, std::uint64_t seed,
                                  const std::function<void(const LitModel<float>&)>& keep = {},
                                  double stop_at_train_map = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = make_synthetic_data(cfg, seed);
  auto mc = cfg.model_config(cfg.synthetic_sizes().vocab_size(), cfg.synth_docs);
  mc.variant = variant;
  LitModel<float> model(mc, seed);
  SyntheticRun run;
  run.variant = variant;
  run.loss = loss;
  run.seed = seed;
  const auto hist = train(model, data.train, cfg.train_config(loss, seed), [&](const EpochStats&) {
    return stop_at_train_map > 0.0 && evaluate_map(model, data.train) >= stop_at_train_map;
  });
  run.epochs_run = hist.size();
  run.train_map = evaluate_map(model, data.train);
  run.test_map = evaluate_map(model, data.test);
  run.isolated_bound = isolated_bound_map(data.test_task);
  run.train_hash = data.train_task.hash();
  run.test_hash = data.test_task.hash();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (keep) keep(model);
  return run;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const auto x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
inline double spread_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (const auto x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// MAP per (loss, seed). Missing cells mark the table partial.
class LossTable {
 public:
  LossTable(std::vector<LossKind> losses, std::vector<std::uint64_t> seeds)
      : losses_(std::move(losses)), seeds_(std::move(seeds)) {}

  void set(LossKind l, std::uint64_t seed, double map) { cells_[{l, seed}] = map; }

  std::optional<double> get(LossKind l, std::uint64_t seed) const {
    const auto it = cells_.find({l, seed});
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<double> values(LossKind l) const {
    std::vector<double> out;
    for (const auto s : seeds_)
      if (const auto v = get(l, s)) out.push_back(*v);
    return out;
  }

  std::size_t missing() const {
    std::size_t n = 0;
    for (const auto l : losses_)
      for (const auto s : seeds_)
        if (!get(l, s)) ++n;
    return n;
  }
  bool partial() const { return missing() > 0; }

  const std::vector<LossKind>& losses() const { return losses_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }

  std::string render() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(8) << "loss";
    for (const auto s : seeds_) out << std::setw(10) << ("seed=" + std::to_string(s));
    out << "MAP (mean +- sd)\n";
    for (const auto l : losses_) {
      out << std::setw(8) << to_string(l);
      for (const auto s : seeds_) {
        const auto v = get(l, s);
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(4);
        if (v) cell << *v;
        else cell << "n/a";
        out << std::setw(10) << cell.str();
      }
      const auto vals = values(l);
      if (vals.empty()) out << "n/a";
      else out << mean_of(vals) << " +- " << spread_of(vals) << (vals.size() < seeds_.size() ? " (partial)" : "");
      out << '\n';
    }
    if (partial())
      out << "status: PARTIAL, " << missing() << " of " << losses_.size() * seeds_.size() << " runs missing\n";
    else
      out << "status: complete\n";
    return out.str();
  }

 private:
  std::vector<LossKind> losses_;
  std::vector<std::uint64_t> seeds_;
  std::map<std::pair<LossKind, std::uint64_t>, double> cells_;
};

}  // namespace litrank
