#pragma once

#include <vector>

#include "tag/config.hpp"
#include "tag/embeddings.hpp"
#include "tag/params.hpp"
#include "tag/tensor.hpp"

namespace tag {

// Valid prefix lengths per block of the joint sequence
// [answer(k_cap) | objects(m_cap) | ocr(n_cap) | decode(t_cap)].
struct ValidLengths {
  int k_used = 0;
  int m_used = 0;
  int n_used = 0;
  int t_used = 0;
};

struct TransformerLayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Tensor ffw1_w, ffw1_b, ffw2_w, ffw2_b;
};

// L pre-norm transformer layers plus a final layer norm; registered
// under "fusion." names.
struct TransformerParams {
  TransformerParams(const ModelConfig& config, Rng& init_rng, ParamRegistry& registry);

  std::vector<TransformerLayerParams> layers;
  Tensor final_gain, final_bias;
};

// S x S additive mask, entries 0 (visible) or -inf (masked), with
// S = k_cap + m_cap + n_cap + t_cap. Context positions see all valid
// context; decode position t sees valid context plus decode positions
// <= t; padding is masked in both directions.
Tensor build_mask(const ValidLengths& used, const ModelConfig& config);

// [F_ans; F_obj; F_ocr; decode] stacked at fixed offsets 0, k_cap,
// k_cap+m_cap, k_cap+m_cap+n_cap.
Tensor build_joint_sequence(const FeatureBundle& bundle, const Tensor& decode_embeds,
                            const ModelConfig& config);

// L x (multi-head self-attention, add; feed-forward, add), pre-norm,
// then a final layer norm. Pass a dropout rng only during training.
// Throws naming the layer index if activations go non-finite.
Tensor transformer_forward(const Tensor& seq, const Tensor& mask, const TransformerParams& params,
                           const ModelConfig& config, Rng* dropout_rng = nullptr,
                           bool training = false);

}  // namespace tag
