// Copyright 2026 The ICPC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Pre-norm Transformer encoder classifier with a learnable class token,
// a position table sized to the training-maximum grid, key masking for
// padded batches, and hand-written reverse-mode gradients.
//
// Shapes: every activation is a (sequence x features) row-major matrix;
// row 0 is the class token, rows 1..n are patches/words, rows past the
// valid length are padding.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "icpc/error.hpp"
#include "icpc/model/config.hpp"
#include "icpc/model/flops.hpp"
#include "icpc/model/frontend.hpp"
#include "icpc/model/params.hpp"

namespace icpc {

struct LayerParamIndex {
  std::size_t ln1_gamma, ln1_beta, qkv_weight, qkv_bias, out_weight, out_bias;
  std::size_t ln2_gamma, ln2_beta, fc1_weight, fc1_bias, fc2_weight, fc2_bias;
};

struct ParamIndex {
  std::size_t patch_weight = 0, patch_bias = 0;  // non-text
  std::size_t token_weight = 0;                  // text
  std::size_t cls = 0, pos = 0;
  std::vector<LayerParamIndex> layers;
  std::size_t norm_gamma = 0, norm_beta = 0, head_weight = 0, head_bias = 0;
};

template <typename T>
struct Model {
  ModelConfig config;
  ParamSet<T> params;
  ParamIndex index;

  Model() = default;
  explicit Model(const ModelConfig& cfg) : config(cfg) {
    config.validate();
    const int d = cfg.embed_dim;
    const int hd = cfg.hidden_dim();
    auto& p = params;
    if (cfg.modality == Modality::text) {
      index.token_weight = p.add("embed.token.weight", {cfg.vocab_size, d});
    } else {
      index.patch_weight = p.add("embed.patch.weight", {cfg.patch_dim(), d});
      index.patch_bias = p.add("embed.patch.bias", {d});
    }
    index.cls = p.add("embed.cls", {d});
    index.pos = p.add("embed.pos", {cfg.position_rows(), d});
    for (int l = 0; l < cfg.n_layers; ++l) {
      const std::string b = "blocks." + std::to_string(l) + ".";
      LayerParamIndex li{};
      li.ln1_gamma = p.add(b + "ln1.gamma", {d});
      li.ln1_beta = p.add(b + "ln1.beta", {d});
      li.qkv_weight = p.add(b + "attn.qkv.weight", {d, 3 * d});
      li.qkv_bias = p.add(b + "attn.qkv.bias", {3 * d});
      li.out_weight = p.add(b + "attn.out.weight", {d, d});
      li.out_bias = p.add(b + "attn.out.bias", {d});
      li.ln2_gamma = p.add(b + "ln2.gamma", {d});
      li.ln2_beta = p.add(b + "ln2.beta", {d});
      li.fc1_weight = p.add(b + "mlp.fc1.weight", {d, hd});
      li.fc1_bias = p.add(b + "mlp.fc1.bias", {hd});
      li.fc2_weight = p.add(b + "mlp.fc2.weight", {hd, d});
      li.fc2_bias = p.add(b + "mlp.fc2.bias", {d});
      index.layers.push_back(li);
    }
    index.norm_gamma = p.add("norm.gamma", {d});
    index.norm_beta = p.add("norm.beta", {d});
    index.head_weight = p.add("head.weight", {d, cfg.num_classes});
    index.head_bias = p.add("head.bias", {cfg.num_classes});
  }

  // Xavier-uniform linear layers, N(0, 0.02) embeddings, unit layer-norm
  // gains, zero biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto xavier = [&](std::size_t idx) {
      auto m = params.matrix(idx);
      const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> u(-a, a);
      for (auto& v : params.span(idx)) v = static_cast<T>(u(rng));
    };
    auto normal = [&](std::size_t idx, double sd) {
      std::normal_distribution<double> n(0.0, sd);
      for (auto& v : params.span(idx)) v = static_cast<T>(n(rng));
    };
    auto fill = [&](std::size_t idx, T v) {
      for (auto& x : params.span(idx)) x = v;
    };
    params.set_zero();
    if (config.modality == Modality::text) {
      normal(index.token_weight, 0.02);
    } else {
      xavier(index.patch_weight);
    }
    normal(index.cls, 0.02);
    normal(index.pos, 0.02);
    for (const auto& li : index.layers) {
      fill(li.ln1_gamma, T(1));
      fill(li.ln2_gamma, T(1));
      xavier(li.qkv_weight);
      xavier(li.out_weight);
      xavier(li.fc1_weight);
      xavier(li.fc2_weight);
    }
    fill(index.norm_gamma, T(1));
    xavier(index.head_weight);
  }
};

// Embedding vectors of one sample plus what backprop into the embedding
// layer needs.
template <typename T>
struct EncodedSample {
  MatrixR<T> vectors;          // (1 + n [+ padding]) x embed_dim
  PositionSelection positions;
  std::vector<std::uint8_t> mask;  // 1 on valid slots (class token + n)
  int label = 0;

  [[nodiscard]] int valid_length() const {
    return 1 + static_cast<int>(positions.indices.size());
  }
};

namespace detail {

template <typename T>
void check_positions(const ModelConfig& cfg, const PositionSelection& sel) {
  if (!(sel.full == cfg.max_grid)) {
    throw ShapeError("position selection was made for grid " + sel.full.str() +
                     " but the model table is " + cfg.max_grid.str());
  }
  for (int idx : sel.indices) {
    if (idx < 0 || idx >= cfg.max_grid.total()) {
      throw ShapeError("position index " + std::to_string(idx) +
                       " outside the table");
    }
  }
}

}  // namespace detail

template <typename T>
[[nodiscard]] EncodedSample<T> embed(const Model<T>& model,
                                     const ModelInput& in) {
  const ModelConfig& cfg = model.config;
  const int d = cfg.embed_dim;
  const int n = in.length();
  detail::check_positions<T>(cfg, in.positions);
  if (n < 1) throw ShapeError("sample has no tokens");
  EncodedSample<T> out;
  out.positions = in.positions;
  out.label = in.label;
  out.mask.assign(static_cast<std::size_t>(n) + 1, 1);
  out.vectors.resize(n + 1, d);
  const auto pos = model.params.matrix(model.index.pos);
  out.vectors.row(0) = model.params.matrix(model.index.cls) + pos.row(0);
  if (cfg.modality == Modality::text) {
    if (static_cast<int>(in.token_ids.size()) != n) {
      throw ShapeError("token count differs from the position selection");
    }
    const auto table = model.params.matrix(model.index.token_weight);
    for (int i = 0; i < n; ++i) {
      const int id = in.token_ids[static_cast<std::size_t>(i)];
      if (id < 0 || id >= cfg.vocab_size) {
        throw ShapeError("token id " + std::to_string(id) +
                         " outside the vocabulary");
      }
      out.vectors.row(i + 1) =
          table.row(id) + pos.row(1 + in.positions.indices[static_cast<std::size_t>(i)]);
    }
  } else {
    const int pd = cfg.patch_dim();
    if (in.patch_dim != pd ||
        in.patches.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(pd)) {
      throw ShapeError("patch rows do not match the model patch size or the "
                       "position selection");
    }
    const Eigen::Map<const MatrixR<float>> rows(in.patches.data(), n, pd);
    out.vectors.bottomRows(n).noalias() =
        rows.cast<T>() * model.params.matrix(model.index.patch_weight);
    const auto bias = model.params.matrix(model.index.patch_bias);
    for (int i = 0; i < n; ++i) {
      out.vectors.row(i + 1) +=
          bias + pos.row(1 + in.positions.indices[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

// Pads every sample with zero rows and mask 0 up to the longest length.
template <typename T>
void pad_batch(std::vector<EncodedSample<T>>& batch) {
  Eigen::Index longest = 0;
  for (const auto& s : batch) longest = std::max(longest, s.vectors.rows());
  for (auto& s : batch) {
    const Eigen::Index old = s.vectors.rows();
    if (old == longest) continue;
    s.vectors.conservativeResize(longest, Eigen::NoChange);
    s.vectors.bottomRows(longest - old).setZero();
    s.mask.resize(static_cast<std::size_t>(longest), 0);
  }
}

namespace detail {

inline constexpr double kLayerNormEps = 1e-6;

template <typename T>
struct LayerNormCache {
  MatrixR<T> xhat;
  std::vector<T> rstd;
};

template <typename T, typename In>
MatrixR<T> layer_norm(const In& x, const Eigen::Map<const MatrixR<T>>& gamma,
                      const Eigen::Map<const MatrixR<T>>& beta,
                      LayerNormCache<T>* cache) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  MatrixR<T> xhat(rows, cols);
  std::vector<T> rstd(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().mean();
    const T rs = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    rstd[static_cast<std::size_t>(r)] = rs;
    xhat.row(r) = (x.row(r).array() - mean) * rs;
  }
  MatrixR<T> y(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    y.row(r) = xhat.row(r).cwiseProduct(gamma) + beta;
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename T>
MatrixR<T> layer_norm_backward(const MatrixR<T>& dy, const LayerNormCache<T>& c,
                               const Eigen::Map<const MatrixR<T>>& gamma,
                               Eigen::Map<MatrixR<T>> dgamma,
                               Eigen::Map<MatrixR<T>> dbeta) {
  const Eigen::Index rows = dy.rows(), cols = dy.cols();
  MatrixR<T> dx(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    dgamma += dy.row(r).cwiseProduct(c.xhat.row(r));
    dbeta += dy.row(r);
    const RowVector<T> dxhat = dy.row(r).cwiseProduct(gamma);
    const T mean_d = dxhat.mean();
    const T mean_dx = dxhat.cwiseProduct(c.xhat.row(r)).mean();
    dx.row(r) = (dxhat.array() - mean_d - c.xhat.row(r).array() * mean_dx) *
                c.rstd[static_cast<std::size_t>(r)];
  }
  return dx;
}

template <typename T>
T gelu(T u) {
  return T(0.5) * u * (T(1) + std::erf(u / std::numbers::sqrt2_v<T>));
}

template <typename T>
T gelu_grad(T u) {
  const T cdf = T(0.5) * (T(1) + std::erf(u / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * u * u) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return cdf + u * pdf;
}

template <typename T>
struct LayerCache {
  MatrixR<T> x_in;
  LayerNormCache<T> ln1;
  MatrixR<T> a;    // ln1 output
  MatrixR<T> qkv;
  std::vector<MatrixR<T>> probs;  // per head, seq x seq
  MatrixR<T> o;    // concatenated head outputs
  MatrixR<T> drop1;  // dropout scale on the attention branch (empty if off)
  MatrixR<T> x1;
  LayerNormCache<T> ln2;
  MatrixR<T> c;    // ln2 output
  MatrixR<T> u;    // fc1 pre-activation
  MatrixR<T> g;    // gelu(u)
  MatrixR<T> drop2;
};

template <typename T>
struct SampleCache {
  std::vector<LayerCache<T>> layers;
  MatrixR<T> x_out;  // final residual stream
  LayerNormCache<T> lnf;
  MatrixR<T> f;      // final-norm class-token row
};

template <typename T>
MatrixR<T> dropout_scale(Eigen::Index rows, Eigen::Index cols, double rate,
                         std::mt19937_64& rng) {
  MatrixR<T> m(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = keep(rng) ? scale : T(0);
  }
  return m;
}

// Forward pass of one (possibly padded) sample. Returns the logits row.
template <typename T>
RowVector<T> forward_sample(const Model<T>& model, const MatrixR<T>& x0,
                            std::span<const std::uint8_t> mask,
                            SampleCache<T>* cache, std::mt19937_64* dropout_rng,
                            FlopCounter* flops) {
  const ModelConfig& cfg = model.config;
  const ParamSet<T>& P = model.params;
  const Eigen::Index seq = x0.rows();
  const int d = cfg.embed_dim;
  const int heads = cfg.n_heads;
  const int dh = cfg.head_dim();
  const int hd = cfg.hidden_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const bool use_dropout = dropout_rng != nullptr && cfg.dropout > 0.0;
  constexpr T neg_inf = -std::numeric_limits<T>::infinity();

  if (cache) cache->layers.resize(static_cast<std::size_t>(cfg.n_layers));
  MatrixR<T> x = x0;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerParamIndex& li = model.index.layers[static_cast<std::size_t>(l)];
    LayerCache<T>* lc = cache ? &cache->layers[static_cast<std::size_t>(l)] : nullptr;
    if (lc) lc->x_in = x;

    MatrixR<T> a = layer_norm<T>(x, P.matrix(li.ln1_gamma), P.matrix(li.ln1_beta),
                                 lc ? &lc->ln1 : nullptr);
    MatrixR<T> qkv = a * P.matrix(li.qkv_weight);
    qkv.rowwise() += P.matrix(li.qkv_bias).row(0);
    if (flops) flops->add_matmul(seq, d, 3 * d);

    MatrixR<T> o(seq, d);
    if (lc) lc->probs.resize(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      const auto q = qkv.middleCols(h * dh, dh);
      const auto k = qkv.middleCols(d + h * dh, dh);
      const auto v = qkv.middleCols(2 * d + h * dh, dh);
      MatrixR<T> s = (q * k.transpose()) * scale;
      if (flops) flops->add_matmul(seq, dh, seq, true);
      for (Eigen::Index j = 0; j < seq; ++j) {
        if (!mask[static_cast<std::size_t>(j)]) s.col(j).setConstant(neg_inf);
      }
      for (Eigen::Index r = 0; r < seq; ++r) {
        const T m = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - m).exp();
        s.row(r) /= s.row(r).sum();
      }
      o.middleCols(h * dh, dh).noalias() = s * v;
      if (flops) flops->add_matmul(seq, seq, dh, true);
      if (lc) lc->probs[static_cast<std::size_t>(h)] = std::move(s);
    }
    MatrixR<T> attn = o * P.matrix(li.out_weight);
    attn.rowwise() += P.matrix(li.out_bias).row(0);
    if (flops) flops->add_matmul(seq, d, d);
    if (use_dropout) {
      MatrixR<T> m = dropout_scale<T>(seq, d, cfg.dropout, *dropout_rng);
      attn = attn.cwiseProduct(m);
      if (lc) lc->drop1 = std::move(m);
    }
    x += attn;
    if (lc) {
      lc->a = std::move(a);
      lc->qkv = std::move(qkv);
      lc->o = std::move(o);
      lc->x1 = x;
    }

    MatrixR<T> c = layer_norm<T>(x, P.matrix(li.ln2_gamma), P.matrix(li.ln2_beta),
                                 lc ? &lc->ln2 : nullptr);
    MatrixR<T> u = c * P.matrix(li.fc1_weight);
    u.rowwise() += P.matrix(li.fc1_bias).row(0);
    if (flops) flops->add_matmul(seq, d, hd);
    MatrixR<T> g = u.unaryExpr([](T v) { return gelu(v); });
    MatrixR<T> m = g * P.matrix(li.fc2_weight);
    m.rowwise() += P.matrix(li.fc2_bias).row(0);
    if (flops) flops->add_matmul(seq, hd, d);
    if (use_dropout) {
      MatrixR<T> dm = dropout_scale<T>(seq, d, cfg.dropout, *dropout_rng);
      m = m.cwiseProduct(dm);
      if (lc) lc->drop2 = std::move(dm);
    }
    x += m;
    if (lc) {
      lc->c = std::move(c);
      lc->u = std::move(u);
      lc->g = std::move(g);
    }
  }
  MatrixR<T> f = layer_norm<T>(x.topRows(1), P.matrix(model.index.norm_gamma),
                               P.matrix(model.index.norm_beta),
                               cache ? &cache->lnf : nullptr);
  RowVector<T> logits = f * P.matrix(model.index.head_weight);
  logits += P.matrix(model.index.head_bias);
  if (flops) flops->add_matmul(1, d, cfg.num_classes);
  if (cache) {
    cache->x_out = std::move(x);
    cache->f = std::move(f);
  }
  return logits;
}

template <typename T>
void check_finite(const RowVector<T>& logits) {
  if (!logits.allFinite()) {
    throw NumericError("non-finite activations in the forward pass");
  }
}

}  // namespace detail

// Logits (batch x classes). The batch must be padded to one length.
template <typename T>
[[nodiscard]] MatrixR<T> forward(const Model<T>& model,
                                 std::span<const EncodedSample<T>> batch,
                                 FlopCounter* flops = nullptr) {
  MatrixR<T> out(static_cast<Eigen::Index>(batch.size()), model.config.num_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& s = batch[b];
    if (s.mask.size() != static_cast<std::size_t>(s.vectors.rows())) {
      throw ShapeError("mask length differs from the sequence length");
    }
    if (b > 0 && s.vectors.rows() != batch[0].vectors.rows()) {
      throw ShapeError("batch is not padded to a common length");
    }
    RowVector<T> logits =
        detail::forward_sample<T>(model, s.vectors, s.mask, nullptr, nullptr, flops);
    detail::check_finite(logits);
    out.row(static_cast<Eigen::Index>(b)) = logits;
  }
  return out;
}

template <typename T>
[[nodiscard]] std::vector<double> softmax(const RowVector<T>& logits) {
  std::vector<double> p(static_cast<std::size_t>(logits.size()));
  const double m = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    p[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(logits(i)) - m);
    sum += p[static_cast<std::size_t>(i)];
  }
  for (auto& v : p) v /= sum;
  return p;
}

struct Prediction {
  int label = 0;
  double confidence = 0.0;  // softmax probability of `label`
  std::vector<double> probabilities;
};

[[nodiscard]] inline Prediction prediction_from_probs(std::vector<double> probs) {
  Prediction p;
  p.label = static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                             probs.begin());
  p.confidence = probs[static_cast<std::size_t>(p.label)];
  p.probabilities = std::move(probs);
  return p;
}

template <typename T>
[[nodiscard]] Prediction predict_from_logits(const RowVector<T>& logits) {
  return prediction_from_probs(softmax(logits));
}

template <typename T>
[[nodiscard]] Prediction predict_with_confidence(const Model<T>& model,
                                                 const ModelInput& in,
                                                 FlopCounter* flops = nullptr) {
  const EncodedSample<T> e = embed(model, in);
  const MatrixR<T> logits =
      forward<T>(model, std::span<const EncodedSample<T>>(&e, 1), flops);
  return predict_from_logits<T>(logits.row(0));
}

template <typename T>
struct LossAndGrads {
  double loss = 0.0;
  int correct = 0;
  ParamSet<T> grads;
};

// Mean cross-entropy over the batch and its gradient for every parameter.
// With a non-null dropout_seed dropout is active (training mode).
template <typename T>
[[nodiscard]] LossAndGrads<T> loss_and_grads(
    const Model<T>& model, std::span<const ModelInput> batch,
    const std::uint64_t* dropout_seed = nullptr, FlopCounter* flops = nullptr) {
  const ModelConfig& cfg = model.config;
  const ParamSet<T>& P = model.params;
  const ParamIndex& I = model.index;
  const int d = cfg.embed_dim;
  const int heads = cfg.n_heads;
  const int dh = cfg.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  if (batch.empty()) throw ShapeError("empty batch");

  std::vector<EncodedSample<T>> enc;
  enc.reserve(batch.size());
  for (const auto& in : batch) {
    if (in.label < 0 || in.label >= cfg.num_classes) {
      throw ShapeError("label " + std::to_string(in.label) + " out of range");
    }
    enc.push_back(embed(model, in));
  }
  pad_batch(enc);

  LossAndGrads<T> out;
  out.grads = P.zeros_like();
  ParamSet<T>& G = out.grads;
  const T inv_batch = T(1) / static_cast<T>(batch.size());

  std::mt19937_64 drop_rng(dropout_seed ? *dropout_seed : 0);
  for (std::size_t b = 0; b < enc.size(); ++b) {
    const EncodedSample<T>& s = enc[b];
    const ModelInput& in = batch[b];
    const Eigen::Index seq = s.vectors.rows();
    detail::SampleCache<T> cache;
    const RowVector<T> logits = detail::forward_sample(
        model, s.vectors, s.mask, &cache, dropout_seed ? &drop_rng : nullptr, flops);
    detail::check_finite(logits);
    const std::vector<double> probs = softmax(logits);
    const double p_true = probs[static_cast<std::size_t>(s.label)];
    out.loss += -std::log(std::max(p_true, 1e-300)) / static_cast<double>(batch.size());
    const int argmax = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (argmax == s.label) ++out.correct;

    RowVector<T> dlogits(cfg.num_classes);
    for (int k = 0; k < cfg.num_classes; ++k) {
      dlogits(k) = static_cast<T>(probs[static_cast<std::size_t>(k)] -
                                  (k == s.label ? 1.0 : 0.0)) * inv_batch;
    }
    // head
    G.matrix(I.head_weight).noalias() += cache.f.transpose() * dlogits;
    G.matrix(I.head_bias) += dlogits;
    const MatrixR<T> df = dlogits * P.matrix(I.head_weight).transpose();
    MatrixR<T> dx = MatrixR<T>::Zero(seq, d);
    dx.topRows(1) = detail::layer_norm_backward<T>(
        df, cache.lnf, P.matrix(I.norm_gamma), G.matrix(I.norm_gamma),
        G.matrix(I.norm_beta));

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
      const LayerParamIndex& li = I.layers[static_cast<std::size_t>(l)];
      const detail::LayerCache<T>& lc = cache.layers[static_cast<std::size_t>(l)];

      // MLP branch
      MatrixR<T> dm = dx;
      if (lc.drop2.size() > 0) dm = dm.cwiseProduct(lc.drop2);
      G.matrix(li.fc2_weight).noalias() += lc.g.transpose() * dm;
      G.matrix(li.fc2_bias) += dm.colwise().sum();
      MatrixR<T> du = dm * P.matrix(li.fc2_weight).transpose();
      du.array() *= lc.u.unaryExpr([](T v) { return detail::gelu_grad(v); }).array();
      G.matrix(li.fc1_weight).noalias() += lc.c.transpose() * du;
      G.matrix(li.fc1_bias) += du.colwise().sum();
      const MatrixR<T> dc = du * P.matrix(li.fc1_weight).transpose();
      dx += detail::layer_norm_backward<T>(dc, lc.ln2, P.matrix(li.ln2_gamma),
                                           G.matrix(li.ln2_gamma),
                                           G.matrix(li.ln2_beta));

      // attention branch
      MatrixR<T> dattn = dx;
      if (lc.drop1.size() > 0) dattn = dattn.cwiseProduct(lc.drop1);
      G.matrix(li.out_weight).noalias() += lc.o.transpose() * dattn;
      G.matrix(li.out_bias) += dattn.colwise().sum();
      const MatrixR<T> dout = dattn * P.matrix(li.out_weight).transpose();
      MatrixR<T> dqkv(seq, 3 * d);
      for (int h = 0; h < heads; ++h) {
        const MatrixR<T>& pr = lc.probs[static_cast<std::size_t>(h)];
        const auto q = lc.qkv.middleCols(h * dh, dh);
        const auto k = lc.qkv.middleCols(d + h * dh, dh);
        const auto v = lc.qkv.middleCols(2 * d + h * dh, dh);
        const auto dO = dout.middleCols(h * dh, dh);
        const MatrixR<T> dp = dO * v.transpose();
        dqkv.middleCols(2 * d + h * dh, dh).noalias() = pr.transpose() * dO;
        MatrixR<T> ds = pr.cwiseProduct(dp);
        const Eigen::Matrix<T, Eigen::Dynamic, 1> rowdot = ds.rowwise().sum();
        ds = pr.cwiseProduct(dp.colwise() - rowdot) * scale;
        dqkv.middleCols(h * dh, dh).noalias() = ds * k;
        dqkv.middleCols(d + h * dh, dh).noalias() = ds.transpose() * q;
      }
      G.matrix(li.qkv_weight).noalias() += lc.a.transpose() * dqkv;
      G.matrix(li.qkv_bias) += dqkv.colwise().sum();
      const MatrixR<T> da = dqkv * P.matrix(li.qkv_weight).transpose();
      dx += detail::layer_norm_backward<T>(da, lc.ln1, P.matrix(li.ln1_gamma),
                                           G.matrix(li.ln1_gamma),
                                           G.matrix(li.ln1_beta));
    }

    // embedding layer; padded rows carry no input
    const int n = s.valid_length() - 1;
    auto dpos = G.matrix(I.pos);
    G.matrix(I.cls) += dx.row(0);
    dpos.row(0) += dx.row(0);
    for (int i = 0; i < n; ++i) {
      dpos.row(1 + s.positions.indices[static_cast<std::size_t>(i)]) += dx.row(i + 1);
    }
    if (cfg.modality == Modality::text) {
      auto dtok = G.matrix(I.token_weight);
      for (int i = 0; i < n; ++i) {
        dtok.row(in.token_ids[static_cast<std::size_t>(i)]) += dx.row(i + 1);
      }
    } else {
      const int pd = cfg.patch_dim();
      const Eigen::Map<const MatrixR<float>> rows(in.patches.data(), n, pd);
      G.matrix(I.patch_weight).noalias() +=
          rows.cast<T>().transpose() * dx.middleRows(1, n);
      G.matrix(I.patch_bias) += dx.middleRows(1, n).colwise().sum();
    }
  }
  if (!std::isfinite(out.loss)) throw NumericError("loss is not finite");
  return out;
}

// Loss only (no gradients); used by finite-difference checks.
template <typename T>
[[nodiscard]] double batch_loss(const Model<T>& model,
                                std::span<const ModelInput> batch) {
  std::vector<EncodedSample<T>> enc;
  for (const auto& in : batch) enc.push_back(embed(model, in));
  pad_batch(enc);
  const MatrixR<T> logits = forward<T>(model, enc);
  double loss = 0.0;
  for (std::size_t b = 0; b < enc.size(); ++b) {
    const auto p = softmax<T>(logits.row(static_cast<Eigen::Index>(b)));
    loss -= std::log(p[static_cast<std::size_t>(enc[b].label)]);
  }
  return loss / static_cast<double>(enc.size());
}

}  // namespace icpc
