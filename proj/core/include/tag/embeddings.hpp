#pragma once

#include <string>
#include <vector>

#include "tag/config.hpp"
#include "tag/params.hpp"
#include "tag/scene.hpp"
#include "tag/tensor.hpp"
#include "tag/vocab.hpp"

namespace tag {

// The extended text block starts with at most this many answer words;
// object labels and OCR texts follow, truncated together to k_cap.
inline constexpr int kAnswerWordCap = 20;

// Segment ids. The first three distinguish word roles inside the
// extended text block; the rest tag whole blocks of the joint sequence.
enum Segment : int {
  kSegAnswer = 0,
  kSegObjLabel = 1,
  kSegOcrWord = 2,
  kSegObject = 3,
  kSegOcr = 4,
  kSegDecode = 5,
};
inline constexpr int kNumSegments = 6;

// The three modality sequences fed to the fusion transformer. Rows at or
// beyond the used lengths are exactly zero and masked downstream.
// ocr_texts carries the texts of the embedded OCR slots (length n_used)
// so the pointer targets and decoded words can be resolved later.
struct FeatureBundle {
  Tensor f_ans;  // k_cap x d
  Tensor f_obj;  // m_cap x d
  Tensor f_ocr;  // n_cap x d
  int k_used = 0;
  int m_used = 0;
  int n_used = 0;
  std::vector<std::string> ocr_texts;
};

// Trainable embedding tables and modality projections. Construction
// registers every tensor under "embed." names in the given registry.
struct EmbeddingTables {
  EmbeddingTables(const ModelConfig& config, int vocab_size, int appearance_dim, Rng& init_rng,
                  ParamRegistry& registry);

  int appearance_dim = 0;
  Tensor word;       // |V| x d
  Tensor position;   // k_cap x d, running index over the extended text
  Tensor segment;    // kNumSegments x d
  Tensor decode_position;  // t_cap x d
  Tensor obj_w;      // (A+4) x d
  Tensor obj_b;      // A+4 appearance + relative bbox
  Tensor ocr_w;      // (A+4+lex+604) x d
  Tensor ocr_b;
};

// [x1/width, y1/height, x2/width, y2/height]. Throws on a degenerate
// image size.
std::vector<double> relative_bbox(const BBox& bbox, double width, double height);

// Extended answer text: answer words ++ object labels ++ OCR texts, each
// row word + position + segment embedding, zero-padded to k_cap.
// Unknown words map to <unk>.
Tensor embed_answer_extended(const std::vector<std::string>& answer_words,
                             const std::vector<std::string>& object_labels,
                             const std::vector<std::string>& ocr_texts,
                             const EmbeddingTables& tables, const Vocabulary& vocab,
                             const ModelConfig& config, int* k_used = nullptr);

// Per object: appearance ++ relative bbox, projected to d, plus the
// object segment embedding; zero-padded to m_cap. Objects beyond m_cap
// are dropped.
Tensor embed_objects(const std::vector<ObjectRegion>& objects, double width, double height,
                     const EmbeddingTables& tables, const ModelConfig& config, int* m_used = nullptr);

// Per OCR token: appearance ++ relative bbox ++ lexical ++ PHOC,
// projected to d, plus the OCR segment embedding; zero-padded to n_cap.
// Tokens beyond n_cap are dropped.
Tensor embed_ocr(const std::vector<OcrToken>& tokens, double width, double height,
                 const EmbeddingTables& tables, const Vocabulary& vocab, const ModelConfig& config,
                 int* n_used = nullptr);

}  // namespace tag
