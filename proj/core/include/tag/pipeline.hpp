#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tag/model.hpp"
#include "tag/scene.hpp"

namespace tag {

// How answer candidates are picked from a scene's OCR tokens.
struct AnswerSelectionStrategy {
  enum class Kind { Largest, Random, TopK };
  Kind kind = Kind::Largest;
  std::uint64_t seed = 0;  // Random only
  int k = 1;               // TopK only

  // "largest", "random", or "top_<k>" (also accepts "top-<k>"/"top<k>").
  static AnswerSelectionStrategy parse(const std::string& text, std::uint64_t seed);
  std::string name() const;
};

// largest -> the largest token; random -> one seeded uniform pick,
// reproducible per image_id; top_k -> the k largest by area with the
// reading-order tie-break. Empty when the scene has no OCR tokens.
std::vector<int> select_answers(const Scene& scene, const AnswerSelectionStrategy& strategy);

// One generation attempt. Rejected pairs carry the reason instead of
// being errors.
struct GenerationOutcome {
  bool accepted = false;
  std::string reject_reason;  // "empty" or "duplicate"
  QAPair pair;
  std::vector<std::string> per_step_source;  // "vocab" or "ocr:<j>" per emitted token
};

// Generates a question for the given OCR token as the answer. Rejects
// empty generations and questions identical to an original question of
// the same scene.
GenerationOutcome generate_pair(const PointerModel& tag_model, const Scene& scene, int ocr_index);

struct AugmentStats {
  std::string strategy;
  std::uint64_t seed = 0;
  int scenes = 0;
  int generated = 0;
  int rejected_empty = 0;
  int rejected_duplicate = 0;
  // Diversity diagnostics, reported in the run manifest.
  int novel_answer_texts = 0;   // distinct generated answers unseen among originals
  int copied_tokens = 0;        // pointer-emitted question tokens
  int generated_tokens = 0;     // all emitted question tokens
};

struct DumpRecord {
  std::string image_id;
  std::string answer;
  std::string generated_question;
  std::vector<std::string> per_step_source;
};

struct AugmentResult {
  std::vector<Scene> scenes;  // originals byte-identical, generated pairs appended
  AugmentStats stats;
  std::vector<DumpRecord> dump;  // one record per accepted pair
};

AugmentResult augment(const std::vector<Scene>& train_scenes, const PointerModel& tag_model,
                      const AnswerSelectionStrategy& strategy);

// Exactly {strategy, seed, scenes, generated, rejected_empty,
// rejected_duplicate}.
void write_augment_manifest(const AugmentStats& stats, const std::string& path);

// JSONL, one {image_id, answer, generated_question, per_step_source}
// record per line.
void write_generation_dump(const std::vector<DumpRecord>& dump, const std::string& path);

}  // namespace tag
