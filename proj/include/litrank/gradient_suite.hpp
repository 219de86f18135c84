#pragma once
// Finite-difference checks for every autodiff op, the three model variants
// and the three losses, at double precision. Each op is reduced to a scalar
// by a random weighted sum so that no gradient is trivially uniform.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "litrank/lit_encoder.hpp"
#include "litrank/neural/grad_check.hpp"
#include "litrank/neural/params.hpp"
#include "litrank/neural/tensor.hpp"
#include "litrank/ranking_losses.hpp"

namespace litrank {

struct GradCase {
  std::string name;
  nn::GradCheckResult result;
};

namespace grad_detail {

using D = nn::Tensor<double>;

inline D random(nn::NamedRng& rng, nn::Shape shape, double scale = 1.0, bool grad = true) {
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = scale * rng.uniform(-1.0, 1.0);
  return D::from(std::move(shape), std::move(v), grad);
}

// Weighted sum of `out` with fixed random weights (no gradient).
inline D project(const D& out, std::uint64_t seed) {
  nn::NamedRng rng(seed, "projection");
  auto w = random(rng, out.shape(), 1.0, false);
  return nn::sum(nn::mul(out, w));
}

}  // namespace grad_detail

template <class Model>
void randomize_adapters(Model& model, std::uint64_t seed, double scale = 0.3) {
  nn::NamedRng rng(seed, "adapter.randomize");
  for (auto& p : model.params().all()) {
    if (p.name.find(".up.") == std::string::npos) continue;
    for (auto& v : p.tensor.data()) v = scale * rng.uniform(-1.0, 1.0);
  }
}

// Moves every weight to a well-conditioned random point: fan-in scaled
// matrices, unit-scale embeddings, gains near 1, and LSTM input/forget/output
// gates biased open. At the initial point the embeddings are tiny (sharp
// curvature through the first layer norm) and the adapters are zero.
template <class Model>
void generic_point(Model& model, std::uint64_t seed) {
  nn::NamedRng rng(seed, "generic.point");
  for (auto& p : model.params().all()) {
    const auto& shape = p.tensor.shape();
    const std::size_t rows = shape.size() == 2 ? shape[0] : 1;
    const bool gain = p.name.find("gain") != std::string::npos;
    double scale = 0.2;
    if (gain) scale = 0.3;
    else if (p.name.rfind("embed.", 0) == 0) scale = 1.0;
    else if (rows > 1) scale = std::sqrt(3.0 / static_cast<double>(rows));
    auto v = p.tensor.data();
    for (auto& x : v) x = (gain ? 1.0 : 0.0) + scale * rng.uniform(-1.0, 1.0);
    if (p.name.find(".lstm") != std::string::npos && p.name.ends_with(".b")) {
      const std::size_t a = v.size() / 4;
      for (std::size_t k = 0; k < a; ++k) {
        v[k] += 1.0;
        v[a + k] += 1.0;
        v[3 * a + k] += 1.0;
      }
    }
  }
}

inline std::vector<GradCase> run_gradient_suite(std::uint64_t seed = 11) {
  using namespace grad_detail;
  std::vector<GradCase> out;
  nn::NamedRng rng(seed, "gradient.suite");
  auto check = [&](std::string name, std::vector<D> params, std::function<D()> f) {
    out.push_back({std::move(name), nn::grad_check([&] { return project(f(), seed); }, std::move(params))});
  };

  {
    auto a = random(rng, {3, 4}), b = random(rng, {4, 5});
    check("matmul", {a, b}, [=] { return nn::matmul(a, b); });
  }
  {
    auto a = random(rng, {3, 4});
    check("transpose", {a}, [=] { return nn::transpose(a); });
    check("reshape", {a}, [=] { return nn::reshape(a, {2, 6}); });
    check("scale", {a}, [=] { return nn::scale(a, 1.7); });
    check("relu", {a}, [=] { return nn::relu(a); });
    check("sigmoid", {a}, [=] { return nn::sigmoid(nn::scale(a, 3.0)); });
    check("tanh", {a}, [=] { return nn::tanh(nn::scale(a, 2.0)); });
    check("gelu", {a}, [=] { return nn::gelu(nn::scale(a, 2.0)); });
    check("sum", {a}, [=] { return nn::mul(nn::sum(a), nn::sum(a)); });
    check("mean", {a}, [=] { return nn::mul(nn::mean(a), nn::mean(a)); });
    check("softmax_rows", {a}, [=] { return nn::softmax_rows(nn::scale(a, 2.0)); });
    check("layer_norm", {a}, [=] { return nn::layer_norm(nn::scale(a, 2.0)); });
    check("slice_rows", {a}, [=] { return nn::slice(a, 0, 1, 3); });
    check("slice_cols", {a}, [=] { return nn::slice(a, 1, 1, 3); });
    check("gather_rows", {a}, [=] { return nn::gather_rows(a, {2, 0, 2}); });
    check("embedding_lookup", {a}, [=] { return nn::embedding_lookup(a, {1, 1, 0}); });
    check("scatter_rows", {a}, [=] { return nn::scatter_rows(a, {4, 0, 2}, 5); });
  }
  for (const char* op : {"add", "sub", "mul"}) {
    const std::string name = op;
    auto pick = [name](const D& x, const D& y) {
      if (name == "add") return nn::add(x, y);
      if (name == "sub") return nn::sub(x, y);
      return nn::mul(x, y);
    };
    auto a = random(rng, {3, 4}), same = random(rng, {3, 4}), row = random(rng, {1, 4}), sc = random(rng, {});
    check(name + "_same", {a, same}, [=] { return pick(a, same); });
    check(name + "_row", {a, row}, [=] { return pick(a, row); });
    check(name + "_scalar", {a, sc}, [=] { return pick(a, sc); });
  }
  {
    auto a = random(rng, {2, 3}), b = random(rng, {4, 3}), c = random(rng, {2, 5});
    check("concat_rows", {a, b}, [=] { return nn::concat(std::vector<D>{a, b}, 0); });
    check("concat_cols", {a, c}, [=] { return nn::concat(std::vector<D>{a, c}, 1); });
  }
  {
    auto x = random(rng, {4, 1});
    check("external_scalar", {x}, [=] {
      // value = sum x^3, gradient 3x^2 supplied from outside the graph
      double v = 0.0;
      std::vector<double> g;
      for (const auto xi : x.data()) {
        v += xi * xi * xi;
        g.push_back(3.0 * xi * xi);
      }
      return nn::external_scalar(x, v, g);
    });
  }

  // Layers and adapters.
  {
    const std::size_t H = 8, F = 12;
    LayerParams<double> p;
    p.wq = random(rng, {H, H}, 0.5);
    p.bq = random(rng, {1, H}, 0.1);
    p.wk = random(rng, {H, H}, 0.5);
    p.wv = random(rng, {H, H}, 0.5);
    p.bv = random(rng, {1, H}, 0.1);
    p.wo = random(rng, {H, H}, 0.5);
    p.bo = random(rng, {1, H}, 0.1);
    p.ln1_gain = random(rng, {1, H});
    p.ln1_bias = random(rng, {1, H}, 0.1);
    p.w1 = random(rng, {H, F}, 0.5);
    p.b1 = random(rng, {1, F}, 0.1);
    p.w2 = random(rng, {F, H}, 0.5);
    p.b2 = random(rng, {1, H}, 0.1);
    p.ln2_gain = random(rng, {1, H});
    p.ln2_bias = random(rng, {1, H}, 0.1);
    auto x = random(rng, {7, H});
    const std::vector<SeqSpan> seqs{{0, 3}, {3, 4}};
    check("transformer_layer", {x, p.wq, p.bq, p.wk, p.wv, p.bv, p.wo, p.bo, p.ln1_gain, p.w1, p.b1, p.w2, p.ln2_gain,
                                p.ln2_bias},
          [=] { return transformer_layer<double>(x, p, seqs, 2); });

    AdapterParams<double> ad;
    const std::size_t A = 3;
    ad.down_w = random(rng, {H, A}, 0.6);
    ad.down_b = random(rng, {1, A}, 0.1);
    for (int k = 0; k < 2; ++k) ad.lstm.push_back({random(rng, {A, 4 * A}, 0.6), random(rng, {A, 4 * A}, 0.6), random(rng, {1, 4 * A}, 0.1)});
    ad.up_w = random(rng, {A, H}, 0.6);
    ad.up_b = random(rng, {1, H}, 0.1);
    auto cls = random(rng, {4, H});
    check("lstm_layer", {cls, ad.lstm[0].wx, ad.lstm[0].wh, ad.lstm[0].b},
          [=] { return lstm_layer<double>(nn::slice(cls, 1, 0, A), ad.lstm[0]); });
    check("lstm_adapter", {cls, ad.down_w, ad.down_b, ad.lstm[0].wx, ad.lstm[1].wh, ad.lstm[1].b, ad.up_w, ad.up_b},
          [=] { return lstm_adapter<double>(cls, ad); });
  }

  // Whole models under BCE.
  for (const auto variant : {Variant::isolated, Variant::lstm_after, Variant::lit}) {
    ModelConfig mc;
    mc.variant = variant;
    mc.layers = 2;
    mc.hidden = 8;
    mc.heads = 2;
    mc.adapter_dim = 4;
    mc.ffn_dim = 12;
    mc.max_tokens = 8;
    mc.docs_per_question = 4;
    mc.vocab_size = 12;
    LitModel<double> model(mc, seed);
    generic_point(model, seed);
    // Two questions, summed as in a micro-batch.
    const std::vector<std::vector<EncodedPair>> batch{
        {encode_pair(std::vector<std::size_t>{4, 5}, std::vector<std::size_t>{6, 7}, 8),
         encode_pair(std::vector<std::size_t>{4, 5}, std::vector<std::size_t>{8}, 8),
         encode_pair(std::vector<std::size_t>{4, 5}, std::vector<std::size_t>{9, 10, 11}, 8)},
        {encode_pair(std::vector<std::size_t>{7}, std::vector<std::size_t>{4, 9}, 8),
         encode_pair(std::vector<std::size_t>{7}, std::vector<std::size_t>{5, 6, 10}, 8)}};
    const std::vector<std::vector<double>> labels{{1.0, 0.0, 1.0}, {0.0, 1.0}};
    auto f = [&model, batch, labels] {
      D total;
      for (std::size_t q = 0; q < batch.size(); ++q) {
        auto logits = model.forward(batch[q]);
        const auto r = bce_loss({{logits.data().begin(), logits.data().end()}, labels[q]});
        auto term = nn::external_scalar(logits, r.value / 2.0, [&] {
          auto g = r.grad;
          for (auto& x : g) x /= 2.0;
          return g;
        }());
        total = q == 0 ? term : nn::add(total, term);
      }
      return total;
    };
    // Sampled coordinates: a model this size always has a few gradient entries
    // near 1e-8, below what h=1e-5 resolves in double precision.
    nn::GradCheckOptions opts;
    opts.max_coords_per_param = 6;
    opts.seed = seed;
    out.push_back({std::string("model_") + to_string(variant) + "_bce",
                   nn::grad_check(f, model.params().tensors(), opts)});
  }

  // Losses w.r.t. logits.
  {
    const std::vector<double> labels{1, 0, 0, 1, 0, 1, 0, 0};
    auto logits = random(rng, {8, 1}, 2.0);
    for (const auto kind : {LossKind::bce, LossKind::lambda, LossKind::ap}) {
      auto f = [logits, labels, kind] {
        const auto r = compute_loss(kind, {{logits.data().begin(), logits.data().end()}, labels});
        return nn::external_scalar(logits, r.value, r.grad);
      };
      out.push_back({std::string("loss_") + to_string(kind), nn::grad_check(f, {logits})});
    }
  }
  return out;
}

}  // namespace litrank
