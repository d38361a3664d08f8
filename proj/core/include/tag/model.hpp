#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tag/config.hpp"
#include "tag/decoder.hpp"
#include "tag/embeddings.hpp"
#include "tag/params.hpp"
#include "tag/scene.hpp"
#include "tag/transformer.hpp"
#include "tag/vocab.hpp"

namespace tag {

// The same pointer-generator machinery serves both directions: question
// generation conditions on the answer and emits the question; answering
// conditions on the question and emits the answer.
enum class Task { QuestionGeneration, Answering };

const char* task_name(Task task);
Task task_from_name(const std::string& name);

// Modality switches for the ablations. Disabling a modality zeroes its
// block (valid length 0) and drops its words from the extended text.
struct ModelFlags {
  bool use_obj = true;
  bool use_ocr = true;
  bool extend_text = true;  // append object labels + OCR texts to the text block

  bool operator==(const ModelFlags&) const = default;
};

// Embedding tables + fusion transformer + pointer decoder behind one
// parameter registry. Parameter values are a pure function of
// (config, vocab size, appearance_dim, config.seed).
class PointerModel {
 public:
  PointerModel(const ModelConfig& config, Vocabulary vocab, int appearance_dim,
               ModelFlags flags = {});

  // Embeds one scene with the given leading text words (the answer for
  // question generation, the question for answering).
  FeatureBundle make_bundle(const std::vector<std::string>& lead_words, const Scene& scene) const;

  // Teacher forcing over the whole target sequence in one forward pass;
  // an <end> step is appended. Throws "unsupervisable example" when no
  // step has a target bit.
  LossReport teacher_forced_loss(const FeatureBundle& bundle,
                                 const std::vector<std::string>& target_words,
                                 Rng* dropout_rng = nullptr, bool training = false) const;

  // Greedy argmax decoding, stopping on <end> or after t_cap steps.
  // Deterministic; never emits <begin>/<end>/<pad>.
  std::vector<DecodedToken> decode_greedy(const FeatureBundle& bundle) const;

  // Emitted tokens as words; pointer tokens resolve through
  // bundle.ocr_texts.
  std::vector<std::string> words_for(const std::vector<DecodedToken>& tokens,
                                     const FeatureBundle& bundle) const;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ModelFlags& flags() const { return flags_; }
  int appearance_dim() const { return appearance_dim_; }
  ParamRegistry& params() { return params_; }
  const ParamRegistry& params() const { return params_; }
  const EmbeddingTables& tables() const { return *tables_; }

 private:
  Tensor decode_inputs(const std::vector<DecodedToken>& prev_tokens, const FeatureBundle& bundle,
                       int t_used) const;
  DecodedToken input_token_for_word(const std::string& word, const FeatureBundle& bundle) const;

  ModelConfig config_;
  Vocabulary vocab_;
  ModelFlags flags_;
  int appearance_dim_;
  ParamRegistry params_;
  std::unique_ptr<EmbeddingTables> tables_;
  std::unique_ptr<TransformerParams> fusion_;
  std::unique_ptr<DecoderParams> decoder_;
};

// On-disk model directory: checkpoint.bin, config.cfg, vocab.txt (+
// vocab.txt.bigrams), meta.json (task, flags, appearance_dim).
void save_model_bundle(const PointerModel& model, Task task, const std::string& dir);

struct ModelBundle {
  std::unique_ptr<PointerModel> model;
  Task task = Task::QuestionGeneration;
};

ModelBundle load_model_bundle(const std::string& dir);

}  // namespace tag
