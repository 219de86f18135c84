#pragma once
// Training objectives over one question's candidate list: binary
// cross-entropy, NDCG-weighted pairwise logistic (LambdaLoss family) and a
// histogram-binned soft average precision.
//
// Each returns the scalar loss and its gradient w.r.t. the logits.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace litrank {

struct LabeledScores {
  std::vector<double> logits;
  std::vector<double> labels;  // 0 or 1

  void validate() const {
    if (logits.size() != labels.size()) throw std::invalid_argument("logits/labels length mismatch");
    for (const auto y : labels)
      if (y != 0.0 && y != 1.0) throw std::invalid_argument("labels must be 0 or 1");
  }
  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
  }
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;
};

enum class LossKind { bce, lambda, ap };

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "bce") return LossKind::bce;
  if (s == "lambda") return LossKind::lambda;
  if (s == "ap") return LossKind::ap;
  throw std::invalid_argument("unknown loss '" + std::string(s) + "' (expected bce, lambda or ap)");
}

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::bce: return "bce";
    case LossKind::lambda: return "lambda";
    case LossKind::ap: return "ap";
  }
  return "?";
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Mean over documents of -[y ln s(x) + (1-y) ln(1 - s(x))].
inline LossResult bce_loss(const LabeledScores& ls) {
  ls.validate();
  const auto n = ls.logits.size();
  if (n == 0) throw std::invalid_argument("bce_loss: empty batch");
  LossResult r;
  r.grad.resize(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ls.logits[i];
    const double y = ls.labels[i];
    r.value += (softplus(s) - y * s) * inv;
    r.grad[i] = (stable_sigmoid(s) - y) * inv;
  }
  return r;
}

// Sum over (positive i, negative j) of |dNDCG_ij| * ln(1 + exp(-(s_i - s_j))).
// Ranks come from the current scores (descending, ties by input position)
// and are held constant when differentiating.
inline LossResult lambda_loss(const LabeledScores& ls) {
  ls.validate();
  const auto n = ls.logits.size();
  LossResult r;
  r.grad.assign(n, 0.0);
  const auto npos = ls.positives();
  if (npos == 0 || npos == n) return r;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ls.logits[a] > ls.logits[b]; });
  std::vector<double> discount(n);
  for (std::size_t k = 0; k < n; ++k) discount[order[k]] = 1.0 / std::log2(static_cast<double>(k) + 2.0);
  double idcg = 0.0;
  for (std::size_t k = 0; k < npos; ++k) idcg += 1.0 / std::log2(static_cast<double>(k) + 2.0);

  for (std::size_t i = 0; i < n; ++i) {
    if (ls.labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (ls.labels[j] != 0.0) continue;
      const double gain_gap = std::abs(std::exp2(ls.labels[i]) - std::exp2(ls.labels[j]));
      const double w = gain_gap * std::abs(discount[i] - discount[j]) / idcg;
      const double margin = ls.logits[i] - ls.logits[j];
      r.value += w * softplus(-margin);
      const double g = w * stable_sigmoid(-margin);
      r.grad[i] -= g;
      r.grad[j] += g;
    }
  }
  return r;
}

struct ApLossOptions {
  std::size_t bins = 25;
  // Squash logits with tanh into (-1, 1) before binning. Without it, logits
  // outside [-1, 1] fall off the histogram.
  bool prescale = true;
  double eps = 1e-8;
};

// 1 - softAP. Bin centres c_m evenly cover [-1, 1] with spacing w; each score
// t is assigned to bins by the triangular kernel max(0, 1 - |t - c_m| / w).
// Precision is accumulated from the top bin downward.
inline LossResult ap_loss(const LabeledScores& ls, const ApLossOptions& opt = {}) {
  ls.validate();
  const auto n = ls.logits.size();
  const auto npos = ls.positives();
  if (npos == 0) throw std::invalid_argument("undefined AP: no positive labels");
  if (opt.bins < 2) throw std::invalid_argument("ap_loss needs at least 2 bins");
  const std::size_t m_count = opt.bins;
  const double width = 2.0 / static_cast<double>(m_count - 1);
  auto centre = [&](std::size_t m) { return -1.0 + width * static_cast<double>(m); };

  std::vector<double> t(n), dt_ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (opt.prescale) {
      t[i] = std::tanh(ls.logits[i]);
      dt_ds[i] = 1.0 - t[i] * t[i];
    } else {
      t[i] = ls.logits[i];
      dt_ds[i] = 1.0;
    }
  }

  // Each score touches at most two adjacent bins.
  auto bins_of = [&](double ti, std::size_t& lo) -> bool {
    const double pos = (ti + 1.0) / width;
    if (pos < -1.0 || pos > static_cast<double>(m_count)) return false;
    const double fl = std::floor(pos);
    lo = fl < 0.0 ? 0 : static_cast<std::size_t>(fl);
    return true;
  };
  auto kernel = [&](double ti, std::size_t m) { return std::max(0.0, 1.0 - std::abs(ti - centre(m)) / width); };
  auto dkernel = [&](double ti, std::size_t m) {
    const double d = ti - centre(m);
    if (std::abs(d) >= width) return 0.0;
    return d > 0.0 ? -1.0 / width : (d < 0.0 ? 1.0 / width : 0.0);
  };

  // Cumulative mass over bins >= m. A score's mass summed over every bin it
  // touches is added whole at its lowest touched bin; only the upper bin's
  // share is fractional. Bins below a score then see an exact count, so the
  // value does not wobble by an ulp when a score moves within its bin pair.
  std::vector<double> pos_m(m_count, 0.0);
  std::vector<double> whole_pos(m_count, 0.0), whole_all(m_count, 0.0);
  std::vector<double> part_pos(m_count, 0.0), part_all(m_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = 0;
    if (!bins_of(t[i], lo)) continue;
    std::size_t first = m_count, last = 0;
    double mass = 0.0;
    for (std::size_t m = (lo == 0 ? 0 : lo - 1); m <= lo + 1 && m < m_count; ++m) {
      const double k = kernel(t[i], m);
      if (k <= 0.0) continue;
      pos_m[m] += ls.labels[i] * k;
      first = std::min(first, m);
      last = m;
      mass += k;
    }
    if (first == m_count) continue;
    // Two touched bins carry mass 1 exactly (triangular kernel).
    if (last != first) {
      mass = 1.0;
      const double upper = kernel(t[i], last);
      part_pos[last] += ls.labels[i] * upper;
      part_all[last] += upper;
    }
    whole_pos[first] += ls.labels[i] * mass;
    whole_all[first] += mass;
  }

  std::vector<double> cum_pos(m_count), cum_all(m_count);
  double cp = 0.0, ca = 0.0;
  for (std::size_t m = m_count; m-- > 0;) {
    cp += whole_pos[m];
    ca += whole_all[m];
    cum_pos[m] = cp + part_pos[m];
    cum_all[m] = ca + part_all[m];
  }
  const double total = static_cast<double>(npos);
  double soft_ap = 0.0;
  std::vector<double> denom(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    denom[m] = std::max(cum_all[m], opt.eps);
    soft_ap += (cum_pos[m] / denom[m]) * pos_m[m] / total;
  }

  // d softAP / d pos_k = cum_pos_k / denom_k + sum_{m<=k} pos_m / denom_m  (all / total)
  // d softAP / d all_k = -sum_{m<=k, cum_all_m > eps} pos_m cum_pos_m / cum_all_m^2  (/ total)
  std::vector<double> d_pos(m_count), d_all(m_count);
  double acc_pos = 0.0, acc_all = 0.0;
  for (std::size_t k = 0; k < m_count; ++k) {
    acc_pos += pos_m[k] / denom[k];
    if (cum_all[k] > opt.eps) acc_all -= pos_m[k] * cum_pos[k] / (cum_all[k] * cum_all[k]);
    d_pos[k] = (cum_pos[k] / denom[k] + acc_pos) / total;
    d_all[k] = acc_all / total;
  }

  LossResult r;
  r.value = 1.0 - soft_ap;
  r.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = 0;
    if (!bins_of(t[i], lo)) continue;
    double d_t = 0.0;
    for (std::size_t m = (lo == 0 ? 0 : lo - 1); m <= lo + 1 && m < m_count; ++m)
      d_t += (ls.labels[i] * d_pos[m] + d_all[m]) * dkernel(t[i], m);
    r.grad[i] = -d_t * dt_ds[i];
  }
  return r;
}

inline LossResult compute_loss(LossKind kind, const LabeledScores& ls, const ApLossOptions& ap = {}) {
  switch (kind) {
    case LossKind::bce: return bce_loss(ls);
    case LossKind::lambda: return lambda_loss(ls);
    case LossKind::ap: return ap_loss(ls, ap);
  }
  throw std::invalid_argument("unknown loss kind");
}

}  // namespace litrank
