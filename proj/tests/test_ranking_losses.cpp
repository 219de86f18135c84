#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "litrank/loss_cases.hpp"
#include "litrank/metrics_eval.hpp"
#include "litrank/ranking_losses.hpp"

using namespace litrank;

namespace {

double numeric_grad(LossKind kind, LabeledScores ls, std::size_t i, const ApLossOptions& ap = {}) {
  const double h = 1e-6;
  const double saved = ls.logits[i];
  ls.logits[i] = saved + h;
  const double up = compute_loss(kind, ls, ap).value;
  ls.logits[i] = saved - h;
  const double down = compute_loss(kind, ls, ap).value;
  return (up - down) / (2.0 * h);
}

LabeledScores random_case(std::mt19937_64& rng, std::size_t n, double range) {
  std::uniform_real_distribution<double> u(-range, range);
  LabeledScores ls;
  for (std::size_t i = 0; i < n; ++i) {
    ls.logits.push_back(u(rng));
    ls.labels.push_back(i % 3 == 0 ? 1.0 : 0.0);
  }
  return ls;
}

double exact_ap_by_score(const LabeledScores& ls) {
  std::vector<std::size_t> order(ls.logits.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ls.logits[a] > ls.logits[b]; });
  std::vector<std::string> ranking, gold;
  for (const auto i : order) ranking.push_back(std::to_string(i));
  for (std::size_t i = 0; i < ls.labels.size(); ++i)
    if (ls.labels[i] > 0.0) gold.push_back(std::to_string(i));
  return average_precision(ranking, gold);
}

// softAP straight from the definition: every score against every bin.
double reference_soft_ap(const LabeledScores& ls, std::size_t bins) {
  const double w = 2.0 / static_cast<double>(bins - 1);
  std::vector<double> pos(bins, 0.0), all(bins, 0.0);
  for (std::size_t i = 0; i < ls.logits.size(); ++i)
    for (std::size_t m = 0; m < bins; ++m) {
      const double k = std::max(0.0, 1.0 - std::abs(std::tanh(ls.logits[i]) - (-1.0 + w * m)) / w);
      pos[m] += ls.labels[i] * k;
      all[m] += k;
    }
  double ap = 0.0, npos = 0.0;
  for (const auto y : ls.labels) npos += y;
  for (std::size_t m = 0; m < bins; ++m) {
    double cp = 0.0, ca = 0.0;
    for (std::size_t j = m; j < bins; ++j) {
      cp += pos[j];
      ca += all[j];
    }
    ap += cp / std::max(ca, 1e-8) * pos[m] / npos;
  }
  return ap;
}

}  // namespace

TEST(Bce, ClosedForms) {
  EXPECT_NEAR(bce_loss({{0.0}, {1.0}}).value, std::log(2.0), 1e-15);
  EXPECT_LT(bce_loss({{20.0}, {1.0}}).value, 1e-8);
  // independent arithmetic: mean of softplus(-0.3), softplus(-1.2), softplus(2.0)
  EXPECT_NEAR(bce_loss({{0.3, -1.2, 2.0}, {1, 0, 0}}).value, 0.9815219076165104, 1e-14);
}

TEST(Bce, GradientIsSigmoidMinusLabelOverD) {
  const LabeledScores ls{{0.3, -1.2, 2.0, -0.4}, {1, 0, 0, 1}};
  const auto r = bce_loss(ls);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r.grad[i], (stable_sigmoid(ls.logits[i]) - ls.labels[i]) / 4.0, 1e-12);
    EXPECT_NEAR(r.grad[i], numeric_grad(LossKind::bce, ls, i), 1e-9);
  }
}

TEST(Lambda, HandCaseMatchesFormula) {
  // weight |1 - 1/log2(3)| times ln(1 + e^-1), evaluated independently
  EXPECT_NEAR(lambda_loss(loss_cases::lambda_pair()).value, 0.11561556820897158, 1e-12);
}

TEST(Lambda, ThreeDocCaseMatchesFormula) {
  EXPECT_NEAR(lambda_loss({{0.5, 2.0, -1.0}, {1, 0, 1}}).value, 1.3196366605341114, 1e-12);
}

TEST(Lambda, DegenerateCasesAreZero) {
  EXPECT_EQ(lambda_loss({{1.0, 2.0, 3.0}, {1, 1, 1}}).value, 0.0);
  EXPECT_EQ(lambda_loss({{1.0, 2.0, 3.0}, {0, 0, 0}}).value, 0.0);
  EXPECT_LT(lambda_loss({{40.0, 20.0, -30.0}, {1, 0, 0}}).value, 1e-8);
}

TEST(Lambda, NonIncreasingInMarginWhileRanksHold) {
  // Weights depend on ranks, so monotonicity holds only between crossings
  // (here at 0 and -1).
  for (const auto& [from, to] : {std::pair{-5.0, -1.1}, std::pair{-0.9, -0.1}, std::pair{0.1, 5.0}}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double m = from; m <= to; m += 0.05) {
      const double v = lambda_loss({{m, 0.0, -1.0}, {1, 0, 0}}).value;
      EXPECT_LE(v, prev + 1e-15) << m;
      prev = v;
    }
  }
}

TEST(SoftAp, SeparatedScoresNearZeroLoss) {
  EXPECT_LT(ap_loss({{5.0, 4.0, -4.0, -5.0}, {1, 1, 0, 0}}).value, 0.01);
}

TEST(SoftAp, ExactWhenScoresSitOnDistinctBinCentres) {
  // M=25: centres at -1 + k/12. One document per centre, no bin shared.
  std::vector<int> ks{23, 20, 17, 13, 9, 6, 2};
  LabeledScores ls;
  for (const int k : ks) ls.logits.push_back(std::atanh(-1.0 + k / 12.0));
  ls.labels = {1, 0, 1, 0, 0, 1, 0};
  EXPECT_NEAR(1.0 - ap_loss(ls).value, exact_ap_by_score(ls), 1e-9);
}

TEST(SoftAp, TenDocCaseErrorBounded) {
  const auto ls = loss_cases::ten_docs();
  EXPECT_NEAR(exact_ap_by_score(ls), loss_cases::ten_docs_exact_ap(), 1e-15);
  for (const std::size_t m : {25u, 100u, 400u}) {
    ApLossOptions opt;
    opt.bins = m;
    EXPECT_LT(std::abs(1.0 - ap_loss(ls, opt).value - loss_cases::ten_docs_exact_ap()), 0.05) << m;
  }
}

TEST(SoftAp, UnscaledScoresDegradeFidelity) {
  const auto ls = loss_cases::ten_docs();
  for (const std::size_t m : {25u, 100u, 400u}) {
    ApLossOptions scaled, raw;
    scaled.bins = raw.bins = m;
    raw.prescale = false;
    const double e_scaled = std::abs(1.0 - ap_loss(ls, scaled).value - loss_cases::ten_docs_exact_ap());
    const double e_raw = std::abs(1.0 - ap_loss(ls, raw).value - loss_cases::ten_docs_exact_ap());
    EXPECT_GT(e_raw, e_scaled) << m;
  }
}

TEST(SoftAp, MatchesDefinitionOnRandomCases) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto ls = random_case(rng, 2 + trial % 12, 3.0);
    for (const std::size_t m : {2u, 25u, 100u}) {
      ApLossOptions o;
      o.bins = m;
      EXPECT_NEAR(1.0 - ap_loss(ls, o).value, reference_soft_ap(ls, m), 1e-12);
    }
  }
}

TEST(SoftAp, ValueIsBitStableWhenOnlyMassBelowPositivesMoves) {
  // Doc 1 is a negative straddling bins 11/12 with no positive mass at or
  // above bin 12 but below 16: nudging it leaves every precision unchanged.
  LabeledScores ls{{std::atanh(0.3403), std::atanh(-0.0784), std::atanh(-0.9557), std::atanh(-0.7449),
                    std::atanh(0.8437), std::atanh(-0.9461), std::atanh(0.1222), std::atanh(-0.2831)},
                   {1, 0, 0, 1, 0, 1, 0, 0}};
  const auto base = ap_loss(ls);
  EXPECT_EQ(base.grad[1], 0.0);
  auto up = ls, down = ls;
  up.logits[1] += 1e-5;
  down.logits[1] -= 1e-5;
  EXPECT_EQ(ap_loss(up).value, ap_loss(down).value);
}

TEST(SoftAp, NoPositivesIsAnError) { EXPECT_THROW(ap_loss({{1.0, 2.0}, {0, 0}}), std::invalid_argument); }

TEST(AllLosses, ValueInRangeFiniteAndGradientMatches) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 40; ++t) {
    const auto ls = random_case(rng, 3 + t % 9, t % 2 ? 30.0 : 3.0);
    for (const auto kind : {LossKind::bce, LossKind::lambda, LossKind::ap}) {
      const auto r = compute_loss(kind, ls);
      ASSERT_TRUE(std::isfinite(r.value));
      for (const auto g : r.grad) ASSERT_TRUE(std::isfinite(g));
      if (kind == LossKind::ap) {
        EXPECT_GE(r.value, -1e-12);
        EXPECT_LE(r.value, 1.0 + 1e-12);
      }
      if (t % 2 == 1) continue;  // finite differences are unreliable on saturated tanh
      for (std::size_t i = 0; i < ls.logits.size(); ++i) {
        const double a = r.grad[i], n = numeric_grad(kind, ls, i);
        EXPECT_LT(std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n)), 1e-4)
            << to_string(kind) << " case " << t << " coord " << i;
      }
    }
  }
}

TEST(AllLosses, InvariantToDocumentOrder) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const auto ls = random_case(rng, 8, 2.0);
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LabeledScores p;
    for (const auto i : perm) {
      p.logits.push_back(ls.logits[i]);
      p.labels.push_back(ls.labels[i]);
    }
    for (const auto kind : {LossKind::bce, LossKind::lambda, LossKind::ap})
      EXPECT_NEAR(compute_loss(kind, ls).value, compute_loss(kind, p).value, 1e-12) << to_string(kind);
  }
}

TEST(LossKind, ParseRoundTrip) {
  for (const auto k : {LossKind::bce, LossKind::lambda, LossKind::ap}) EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  EXPECT_ANY_THROW(parse_loss_kind("hinge"));
}
