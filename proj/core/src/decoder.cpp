#include "tag/decoder.hpp"

#include <limits>
#include <stdexcept>

namespace tag {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

DecoderParams::DecoderParams(const ModelConfig& config, int vocab_size, Rng& init_rng,
                             ParamRegistry& registry) {
  const int d = config.d;
  vocab_w = registry.add("decoder.vocab.weight", init_normal({d, vocab_size}, 0.02, init_rng));
  vocab_b = registry.add("decoder.vocab.bias", Tensor::zeros({vocab_size}, true));
  ptr_dec_w = registry.add("decoder.ptr_dec.weight", init_normal({d, d}, 0.02, init_rng));
  ptr_dec_b = registry.add("decoder.ptr_dec.bias", Tensor::zeros({d}, true));
  ptr_ocr_w = registry.add("decoder.ptr_ocr.weight", init_normal({d, d}, 0.02, init_rng));
  ptr_ocr_b = registry.add("decoder.ptr_ocr.bias", Tensor::zeros({d}, true));
}

Tensor step_input_embedding(const DecodedToken& prev, int step, const FeatureBundle& bundle,
                            const EmbeddingTables& tables) {
  const auto t_cap = tables.decode_position.dim(0);
  if (step < 0 || step >= t_cap)
    throw std::runtime_error("step_input_embedding: step " + std::to_string(step) + " out of range");
  Tensor base;
  if (prev.from_ocr) {
    if (prev.index < 0 || prev.index >= bundle.n_used)
      throw std::runtime_error("step_input_embedding: OCR index " + std::to_string(prev.index) +
                               " out of range");
    base = slice_rows(bundle.f_ocr, prev.index, prev.index + 1);
  } else {
    if (prev.index < 0 || prev.index >= tables.word.dim(0))
      throw std::runtime_error("step_input_embedding: vocab id " + std::to_string(prev.index) +
                               " out of range");
    base = gather_rows(tables.word, {prev.index});
  }
  Tensor pos = gather_rows(tables.decode_position, {step});
  Tensor seg = gather_rows(tables.segment, {kSegDecode});
  return add(add(base, pos), seg);
}

Tensor decode_scores(const Tensor& decode_rows, const Tensor& ocr_enriched,
                     const DecoderParams& params) {
  Tensor vocab = add_rowwise(matmul(decode_rows, params.vocab_w), params.vocab_b);
  Tensor dec_t = add_rowwise(matmul(decode_rows, params.ptr_dec_w), params.ptr_dec_b);
  Tensor ocr_t = add_rowwise(matmul(ocr_enriched, params.ptr_ocr_w), params.ptr_ocr_b);
  Tensor pointer = matmul(dec_t, transpose(ocr_t));
  return concat_cols({std::move(vocab), std::move(pointer)});
}

OutputScores extract_scores(const Tensor& logits, int step, int vocab_size, int n_used) {
  if (logits.ndim() != 2 || step < 0 || step >= logits.dim(0))
    throw std::runtime_error("extract_scores: step out of range");
  const auto width = logits.dim(1);
  const int n_cap = static_cast<int>(width) - vocab_size;
  if (n_cap < 0) throw std::runtime_error("extract_scores: logits narrower than vocabulary");
  OutputScores s;
  s.vocab_scores.resize(static_cast<size_t>(vocab_size));
  s.pointer_scores.resize(static_cast<size_t>(n_cap));
  const auto row = logits.data().subspan(static_cast<size_t>(step) * static_cast<size_t>(width),
                                         static_cast<size_t>(width));
  for (int i = 0; i < vocab_size; ++i) s.vocab_scores[static_cast<size_t>(i)] = row[static_cast<size_t>(i)];
  for (int j = 0; j < n_cap; ++j)
    s.pointer_scores[static_cast<size_t>(j)] = row[static_cast<size_t>(vocab_size + j)];
  s.vocab_scores[Vocabulary::kBegin] = kNegInf;
  s.vocab_scores[Vocabulary::kPad] = kNegInf;
  for (int j = n_used; j < n_cap; ++j) s.pointer_scores[static_cast<size_t>(j)] = kNegInf;
  return s;
}

DecodedToken argmax_token(const OutputScores& scores) {
  DecodedToken best{false, 0};
  double best_score = kNegInf;
  for (size_t i = 0; i < scores.vocab_scores.size(); ++i) {
    if (scores.vocab_scores[i] > best_score) {
      best_score = scores.vocab_scores[i];
      best = {false, static_cast<int>(i)};
    }
  }
  for (size_t j = 0; j < scores.pointer_scores.size(); ++j) {
    if (scores.pointer_scores[j] > best_score) {
      best_score = scores.pointer_scores[j];
      best = {true, static_cast<int>(j)};
    }
  }
  return best;
}

std::vector<double> step_target(const std::string& word, const Vocabulary& vocab,
                                const std::vector<std::string>& ocr_texts, int n_used, int n_cap,
                                bool* supervised) {
  std::vector<double> target(static_cast<size_t>(vocab.size() + n_cap), 0.0);
  bool any = false;
  if (vocab.contains(word)) {
    target[static_cast<size_t>(vocab.id(word))] = 1.0;
    any = true;
  }
  for (int j = 0; j < n_used && j < static_cast<int>(ocr_texts.size()); ++j) {
    if (ocr_texts[static_cast<size_t>(j)] == word) {
      target[static_cast<size_t>(vocab.size() + j)] = 1.0;
      any = true;
    }
  }
  if (supervised) *supervised = any;
  return target;
}

std::vector<double> step_valid_mask(int vocab_size, int n_used, int n_cap) {
  std::vector<double> valid(static_cast<size_t>(vocab_size + n_cap), 0.0);
  for (int i = 0; i < vocab_size; ++i) valid[static_cast<size_t>(i)] = 1.0;
  valid[Vocabulary::kBegin] = 0.0;
  valid[Vocabulary::kPad] = 0.0;
  for (int j = 0; j < n_used; ++j) valid[static_cast<size_t>(vocab_size + j)] = 1.0;
  return valid;
}

double LossReport::total() const {
  double t = 0.0;
  for (double x : per_step) t += x;
  return t;
}

}  // namespace tag
