#include "tag/transformer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tag {

namespace {

Tensor ones(std::int64_t d) { return Tensor::full({d}, 1.0, /*requires_grad=*/true); }

Tensor zeros_grad(Shape shape) { return Tensor::zeros(std::move(shape), /*requires_grad=*/true); }

}  // namespace

TransformerParams::TransformerParams(const ModelConfig& config, Rng& init_rng,
                                     ParamRegistry& registry) {
  const int d = config.d;
  const int f = config.ffw_width();
  layers.resize(static_cast<size_t>(config.layers));
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "fusion.layer" + std::to_string(l) + ".";
    TransformerLayerParams& lp = layers[static_cast<size_t>(l)];
    lp.wq = registry.add(p + "attn.q.weight", init_normal({d, d}, 0.02, init_rng));
    lp.bq = registry.add(p + "attn.q.bias", zeros_grad({d}));
    lp.wk = registry.add(p + "attn.k.weight", init_normal({d, d}, 0.02, init_rng));
    lp.bk = registry.add(p + "attn.k.bias", zeros_grad({d}));
    lp.wv = registry.add(p + "attn.v.weight", init_normal({d, d}, 0.02, init_rng));
    lp.bv = registry.add(p + "attn.v.bias", zeros_grad({d}));
    lp.wo = registry.add(p + "attn.out.weight", init_normal({d, d}, 0.02, init_rng));
    lp.bo = registry.add(p + "attn.out.bias", zeros_grad({d}));
    lp.ln1_gain = registry.add(p + "ln1.gain", ones(d));
    lp.ln1_bias = registry.add(p + "ln1.bias", zeros_grad({d}));
    lp.ln2_gain = registry.add(p + "ln2.gain", ones(d));
    lp.ln2_bias = registry.add(p + "ln2.bias", zeros_grad({d}));
    lp.ffw1_w = registry.add(p + "ffw.in.weight", init_normal({d, f}, 0.02, init_rng));
    lp.ffw1_b = registry.add(p + "ffw.in.bias", zeros_grad({f}));
    lp.ffw2_w = registry.add(p + "ffw.out.weight", init_normal({f, d}, 0.02, init_rng));
    lp.ffw2_b = registry.add(p + "ffw.out.bias", zeros_grad({d}));
  }
  final_gain = registry.add("fusion.final_ln.gain", ones(d));
  final_bias = registry.add("fusion.final_ln.bias", zeros_grad({d}));
}

Tensor build_mask(const ValidLengths& used, const ModelConfig& config) {
  const int K = config.k_cap, M = config.m_cap, N = config.n_cap, T = config.t_cap;
  if (used.k_used < 0 || used.k_used > K || used.m_used < 0 || used.m_used > M ||
      used.n_used < 0 || used.n_used > N || used.t_used < 0 || used.t_used > T)
    throw std::runtime_error("build_mask: valid lengths exceed caps");
  const int S = K + M + N + T;
  const double kMasked = -std::numeric_limits<double>::infinity();

  // Valid context positions are mutually visible; decode rows add a
  // causal prefix of the decode block.
  std::vector<char> context_valid(static_cast<size_t>(S), 0);
  for (int i = 0; i < used.k_used; ++i) context_valid[static_cast<size_t>(i)] = 1;
  for (int i = 0; i < used.m_used; ++i) context_valid[static_cast<size_t>(K + i)] = 1;
  for (int i = 0; i < used.n_used; ++i) context_valid[static_cast<size_t>(K + M + i)] = 1;

  std::vector<double> mask(static_cast<size_t>(S) * static_cast<size_t>(S), kMasked);
  auto at = [&](int r, int c) -> double& { return mask[static_cast<size_t>(r) * S + c]; };
  for (int r = 0; r < S; ++r) {
    const bool is_decode = r >= K + M + N;
    const int t = r - (K + M + N);
    if (!is_decode && !context_valid[static_cast<size_t>(r)]) continue;  // padding row
    if (is_decode && t >= used.t_used) continue;
    for (int c = 0; c < S; ++c)
      if (context_valid[static_cast<size_t>(c)]) at(r, c) = 0.0;
    if (is_decode)
      for (int u = 0; u <= t; ++u) at(r, K + M + N + u) = 0.0;
  }
  return Tensor::from_data({S, S}, std::move(mask));
}

Tensor build_joint_sequence(const FeatureBundle& bundle, const Tensor& decode_embeds,
                            const ModelConfig& config) {
  auto expect = [&](const Tensor& t, std::int64_t rows, const char* what) {
    if (t.ndim() != 2 || t.dim(0) != rows || t.dim(1) != config.d)
      throw std::runtime_error(std::string("build_joint_sequence: ") + what + " has shape " +
                               shape_str(t.shape()) + ", expected [" + std::to_string(rows) + ", " +
                               std::to_string(config.d) + "]");
  };
  expect(bundle.f_ans, config.k_cap, "F_ans");
  expect(bundle.f_obj, config.m_cap, "F_obj");
  expect(bundle.f_ocr, config.n_cap, "F_ocr");
  expect(decode_embeds, config.t_cap, "decode embeddings");
  return concat_rows({bundle.f_ans, bundle.f_obj, bundle.f_ocr, decode_embeds});
}

Tensor transformer_forward(const Tensor& seq, const Tensor& mask, const TransformerParams& params,
                           const ModelConfig& config, Rng* dropout_rng, bool training) {
  const int heads = config.heads;
  const std::int64_t d = config.d;
  const std::int64_t dh = d / heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool drop = training && dropout_rng != nullptr && config.dropout > 0.0;

  Tensor x = seq;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const TransformerLayerParams& lp = params.layers[l];

    Tensor h = layer_norm(x, lp.ln1_gain, lp.ln1_bias);
    Tensor q = add_rowwise(matmul(h, lp.wq), lp.bq);
    Tensor k = add_rowwise(matmul(h, lp.wk), lp.bk);
    Tensor v = add_rowwise(matmul(h, lp.wv), lp.bv);
    std::vector<Tensor> head_outs;
    head_outs.reserve(static_cast<size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
      Tensor qh = slice_cols(q, hd * dh, (hd + 1) * dh);
      Tensor kh = slice_cols(k, hd * dh, (hd + 1) * dh);
      Tensor vh = slice_cols(v, hd * dh, (hd + 1) * dh);
      Tensor probs = masked_softmax(scale(matmul(qh, transpose(kh)), inv_sqrt_dh), mask);
      if (drop) probs = dropout(probs, config.dropout, *dropout_rng, true);
      head_outs.push_back(matmul(probs, vh));
    }
    Tensor attn = add_rowwise(matmul(concat_cols(head_outs), lp.wo), lp.bo);
    if (drop) attn = dropout(attn, config.dropout, *dropout_rng, true);
    x = add(x, attn);

    Tensor h2 = layer_norm(x, lp.ln2_gain, lp.ln2_bias);
    Tensor f = gelu(add_rowwise(matmul(h2, lp.ffw1_w), lp.ffw1_b));
    Tensor out = add_rowwise(matmul(f, lp.ffw2_w), lp.ffw2_b);
    if (drop) out = dropout(out, config.dropout, *dropout_rng, true);
    x = add(x, out);

    if (!x.all_finite())
      throw std::runtime_error("non-finite activations in fusion layer " + std::to_string(l));
  }
  return layer_norm(x, params.final_gain, params.final_bias);
}

}  // namespace tag
