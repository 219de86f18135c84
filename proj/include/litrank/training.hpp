#pragma once
// Listwise training of the re-ranker: one question (its whole candidate list)
// is one training instance; gradients are averaged over a minibatch of
// questions before each Adam step.

#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "litrank/lit_encoder.hpp"
#include "litrank/metrics_eval.hpp"
#include "litrank/neural/optim.hpp"
#include "litrank/ranking_losses.hpp"
#include "litrank/synthetic.hpp"

namespace litrank {

struct TrainConfig {
  LossKind loss = LossKind::bce;
  std::size_t epochs = 20;
  std::size_t batch_size = 4;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::size_t ap_bins = 25;

  void validate() const {
    if (epochs == 0) throw InvariantError("epochs must be >= 1");
    if (batch_size == 0) throw InvariantError("batch_size must be >= 1");
    if (!(lr > 0.0)) throw InvariantError("lr must be positive");
    if (ap_bins < 2) throw InvariantError("ap_bins must be >= 2");
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t skipped = 0;  // questions with no usable gradient under this loss
};

// Deterministic Fisher-Yates order for one epoch.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::NamedRng rng(seed, "shuffle.epoch" + std::to_string(epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// `on_epoch` may return true to stop early.
template <class T>
std::vector<EpochStats> train(LitModel<T>& model, const std::vector<TrainingExample>& data, const TrainConfig& cfg,
                              const std::function<bool(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (data.empty()) throw InvariantError("train: no training questions");
  nn::AdamState<T> state;
  const nn::AdamConfig adam{cfg.lr};
  const ApLossOptions ap_opt{cfg.ap_bins};
  std::vector<EpochStats> history;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    EpochStats st{e + 1, 0.0, 0};
    std::size_t used = 0;
    const auto order = epoch_order(data.size(), cfg.seed, e);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto stop = std::min(order.size(), start + cfg.batch_size);
      model.params().zero_grad();
      std::size_t in_batch = 0;
      for (std::size_t b = start; b < stop; ++b) {
        const auto& ex = data[order[b]];
        if (ex.docs.empty()) {
          ++st.skipped;
          continue;
        }
        auto logits = model.forward(ex.docs);
        LabeledScores ls{{logits.data().begin(), logits.data().end()}, ex.labels};
        if (cfg.loss == LossKind::ap && ls.positives() == 0) {
          ++st.skipped;
          continue;
        }
        const auto r = compute_loss(cfg.loss, ls, ap_opt);
        const T inv = T(1) / static_cast<T>(stop - start);
        std::vector<T> g(r.grad.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<T>(r.grad[i]) * inv;
        nn::external_scalar(logits, static_cast<T>(r.value) * inv, std::move(g)).backward();
        st.mean_loss += r.value;
        ++used;
        ++in_batch;
      }
      if (in_batch > 0) nn::adam_step(model.params(), state, adam);
    }
    if (used > 0) st.mean_loss /= static_cast<double>(used);
    history.push_back(st);
    if (on_epoch && on_epoch(st)) break;
  }
  return history;
}

// Candidate UIDs of one question ordered by model logit (ties keep input order).
template <class T>
std::vector<std::string> rank_example(const LitModel<T>& model, const TrainingExample& ex) {
  const auto logits = model.score(ex.docs);
  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return logits[a] > logits[b]; });
  std::vector<std::string> out;
  for (const auto i : order) out.push_back(ex.uids[i]);
  return out;
}

inline std::vector<std::string> gold_of(const TrainingExample& ex) {
  std::vector<std::string> gold;
  for (std::size_t i = 0; i < ex.labels.size(); ++i)
    if (ex.labels[i] > 0.0) gold.push_back(ex.uids[i]);
  return gold;
}

// MAP over questions with at least one positive.
template <class T>
double evaluate_map(const LitModel<T>& model, const std::vector<TrainingExample>& data) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ex : data) {
    const auto gold = gold_of(ex);
    if (gold.empty()) continue;
    sum += average_precision(rank_example(model, ex), gold);
    ++n;
  }
  if (n == 0) throw InvariantError("evaluate_map: no question has a positive label");
  return sum / static_cast<double>(n);
}

}  // namespace litrank
