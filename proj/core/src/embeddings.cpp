#include "tag/embeddings.hpp"

#include <algorithm>
#include <stdexcept>

#include "tag/lexical.hpp"
#include "tag/phoc.hpp"

namespace tag {

namespace {

Tensor pad_rows(Tensor rows, std::int64_t used, std::int64_t cap, std::int64_t d) {
  if (used == cap) return rows;
  Tensor zero = Tensor::zeros({cap - used, d});
  if (used == 0) return zero;
  return concat_rows({std::move(rows), std::move(zero)});
}

Tensor segment_rows(const EmbeddingTables& tables, int segment, std::int64_t count) {
  return gather_rows(tables.segment, std::vector<std::int64_t>(static_cast<size_t>(count), segment));
}

}  // namespace

EmbeddingTables::EmbeddingTables(const ModelConfig& config, int vocab_size, int appearance_dim_in,
                                 Rng& init_rng, ParamRegistry& registry)
    : appearance_dim(appearance_dim_in) {
  const int d = config.d;
  const int obj_in = appearance_dim + 4;
  const int ocr_in = appearance_dim + 4 + kLexicalDim + kPhocDim;
  word = registry.add("embed.word", init_normal({vocab_size, d}, 0.02, init_rng));
  position = registry.add("embed.position", init_normal({config.k_cap, d}, 0.02, init_rng));
  segment = registry.add("embed.segment", init_normal({kNumSegments, d}, 0.02, init_rng));
  decode_position = registry.add("embed.decode_position", init_normal({config.t_cap, d}, 0.02, init_rng));
  obj_w = registry.add("embed.obj_proj.weight", init_normal({obj_in, d}, 0.02, init_rng));
  obj_b = registry.add("embed.obj_proj.bias", init_normal({d}, 0.02, init_rng));
  ocr_w = registry.add("embed.ocr_proj.weight", init_normal({ocr_in, d}, 0.02, init_rng));
  ocr_b = registry.add("embed.ocr_proj.bias", init_normal({d}, 0.02, init_rng));
}

std::vector<double> relative_bbox(const BBox& bbox, double width, double height) {
  if (!(width > 0) || !(height > 0)) throw std::runtime_error("relative_bbox: image size must be positive");
  return {bbox.x1 / width, bbox.y1 / height, bbox.x2 / width, bbox.y2 / height};
}

Tensor embed_answer_extended(const std::vector<std::string>& answer_words,
                             const std::vector<std::string>& object_labels,
                             const std::vector<std::string>& ocr_texts,
                             const EmbeddingTables& tables, const Vocabulary& vocab,
                             const ModelConfig& config, int* k_used_out) {
  std::vector<std::int64_t> word_ids;
  std::vector<std::int64_t> segments;
  auto push = [&](const std::vector<std::string>& words, size_t cap, int segment) {
    for (size_t i = 0; i < words.size() && i < cap; ++i) {
      if (word_ids.size() >= static_cast<size_t>(config.k_cap)) return;
      word_ids.push_back(vocab.id(words[i]));
      segments.push_back(segment);
    }
  };
  push(answer_words, kAnswerWordCap, kSegAnswer);
  push(object_labels, object_labels.size(), kSegObjLabel);
  push(ocr_texts, ocr_texts.size(), kSegOcrWord);

  const auto k_used = static_cast<std::int64_t>(word_ids.size());
  if (k_used_out) *k_used_out = static_cast<int>(k_used);
  if (k_used == 0) return Tensor::zeros({config.k_cap, config.d});

  std::vector<std::int64_t> positions(word_ids.size());
  for (size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<std::int64_t>(i);

  Tensor rows = add(add(gather_rows(tables.word, word_ids), gather_rows(tables.position, positions)),
                    gather_rows(tables.segment, segments));
  return pad_rows(std::move(rows), k_used, config.k_cap, config.d);
}

Tensor embed_objects(const std::vector<ObjectRegion>& objects, double width, double height,
                     const EmbeddingTables& tables, const ModelConfig& config, int* m_used_out) {
  const auto m_used = std::min<std::int64_t>(static_cast<std::int64_t>(objects.size()), config.m_cap);
  if (m_used_out) *m_used_out = static_cast<int>(m_used);
  if (m_used == 0) return Tensor::zeros({config.m_cap, config.d});

  const int in_dim = tables.appearance_dim + 4;
  std::vector<double> feats;
  feats.reserve(static_cast<size_t>(m_used * in_dim));
  for (std::int64_t i = 0; i < m_used; ++i) {
    const ObjectRegion& obj = objects[static_cast<size_t>(i)];
    if (static_cast<int>(obj.appearance.size()) != tables.appearance_dim)
      throw std::runtime_error("object appearance length " + std::to_string(obj.appearance.size()) +
                               " does not match tables (" + std::to_string(tables.appearance_dim) + ")");
    feats.insert(feats.end(), obj.appearance.begin(), obj.appearance.end());
    auto rb = relative_bbox(obj.bbox, width, height);
    feats.insert(feats.end(), rb.begin(), rb.end());
  }
  Tensor features = Tensor::from_data({m_used, in_dim}, std::move(feats));
  Tensor rows = add(add_rowwise(matmul(features, tables.obj_w), tables.obj_b),
                    segment_rows(tables, kSegObject, m_used));
  return pad_rows(std::move(rows), m_used, config.m_cap, config.d);
}

Tensor embed_ocr(const std::vector<OcrToken>& tokens, double width, double height,
                 const EmbeddingTables& tables, const Vocabulary& vocab, const ModelConfig& config,
                 int* n_used_out) {
  const auto n_used = std::min<std::int64_t>(static_cast<std::int64_t>(tokens.size()), config.n_cap);
  if (n_used_out) *n_used_out = static_cast<int>(n_used);
  if (n_used == 0) return Tensor::zeros({config.n_cap, config.d});

  const int in_dim = tables.appearance_dim + 4 + kLexicalDim + kPhocDim;
  std::vector<double> feats;
  feats.reserve(static_cast<size_t>(n_used * in_dim));
  for (std::int64_t i = 0; i < n_used; ++i) {
    const OcrToken& tok = tokens[static_cast<size_t>(i)];
    if (static_cast<int>(tok.appearance.size()) != tables.appearance_dim)
      throw std::runtime_error("ocr appearance length " + std::to_string(tok.appearance.size()) +
                               " does not match tables (" + std::to_string(tables.appearance_dim) + ")");
    feats.insert(feats.end(), tok.appearance.begin(), tok.appearance.end());
    auto rb = relative_bbox(tok.bbox, width, height);
    feats.insert(feats.end(), rb.begin(), rb.end());
    auto lex = lexical_embed(tok.text);
    feats.insert(feats.end(), lex.begin(), lex.end());
    auto ph = phoc(tok.text, vocab.bigrams());
    feats.insert(feats.end(), ph.begin(), ph.end());
  }
  Tensor features = Tensor::from_data({n_used, in_dim}, std::move(feats));
  Tensor rows = add(add_rowwise(matmul(features, tables.ocr_w), tables.ocr_b),
                    segment_rows(tables, kSegOcr, n_used));
  return pad_rows(std::move(rows), n_used, config.n_cap, config.d);
}

}  // namespace tag
