#pragma once

#include <string>
#include <vector>

#include "tag/config.hpp"
#include "tag/embeddings.hpp"
#include "tag/params.hpp"
#include "tag/tensor.hpp"
#include "tag/vocab.hpp"

namespace tag {

// One emitted token: a fixed-vocabulary id or a pointer to an OCR slot.
struct DecodedToken {
  bool from_ocr = false;
  int index = 0;  // vocab id, or OCR slot j when from_ocr

  bool operator==(const DecodedToken&) const = default;
};

struct DecodeState {
  int t = 0;
  std::vector<DecodedToken> emitted;
  bool finished = false;
};

// Per-step scores at prediction time. Forbidden entries (<begin>, <pad>,
// pointer slots at or beyond n_used) are -inf.
struct OutputScores {
  std::vector<double> vocab_scores;    // |V|
  std::vector<double> pointer_scores;  // n_cap
};

// Vocabulary head plus the bilinear dynamic-pointer head; registered
// under "decoder." names.
struct DecoderParams {
  DecoderParams(const ModelConfig& config, int vocab_size, Rng& init_rng, ParamRegistry& registry);

  Tensor vocab_w;    // d x |V|
  Tensor vocab_b;    // |V|
  Tensor ptr_dec_w;  // d x d
  Tensor ptr_dec_b;  // d
  Tensor ptr_ocr_w;  // d x d
  Tensor ptr_ocr_b;  // d
};

// Input embedding for one decode position: the word-table row (vocab
// token) or the F_ocr row (pointed token), plus decode-position and
// decode-segment embeddings. 1 x d.
Tensor step_input_embedding(const DecodedToken& prev, int step, const FeatureBundle& bundle,
                            const EmbeddingTables& tables);

// Raw logits for every decode row at once: [t, d] decode outputs and
// [n_cap, d] enriched OCR rows -> [t, |V| + n_cap], vocabulary columns
// first. pointer[t][j] = (W_d z_t + b_d) . (W_o o_j + b_o).
Tensor decode_scores(const Tensor& decode_rows, const Tensor& ocr_enriched,
                     const DecoderParams& params);

// Prediction-time view of one logits row with forbidden entries at -inf.
OutputScores extract_scores(const Tensor& logits, int step, int vocab_size, int n_used);

// Argmax over the concatenated scores as an emitted token.
DecodedToken argmax_token(const OutputScores& scores);

// Multi-hot target over |V| + n_cap for one ground-truth word: its vocab
// id when in vocabulary, plus every OCR slot (< n_used) with equal text.
// `supervised` reports whether any bit is set.
std::vector<double> step_target(const std::string& word, const Vocabulary& vocab,
                                const std::vector<std::string>& ocr_texts, int n_used, int n_cap,
                                bool* supervised);

// Entries that BCE averages over: all vocabulary columns except <begin>
// and <pad>, and pointer slots below n_used.
std::vector<double> step_valid_mask(int vocab_size, int n_used, int n_cap);

// Teacher-forcing loss summary. mean holds the graph for backward.
struct LossReport {
  Tensor mean;                  // scalar, mean over supervised steps
  std::vector<double> per_step;  // per supervised step, in step order
  int supervised_steps = 0;

  double total() const;
};

}  // namespace tag
