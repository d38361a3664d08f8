#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tag {

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  bool contains(const BBox& inner) const {
    return x1 <= inner.x1 && y1 <= inner.y1 && inner.x2 <= x2 && inner.y2 <= y2;
  }
};

struct ObjectRegion {
  std::string class_label;          // lowercase word
  BBox bbox;
  std::vector<double> appearance;   // length A, detector-feature stand-in
};

struct OcrToken {
  std::string text;                 // non-empty, [a-z0-9]
  BBox bbox;
  std::vector<double> appearance;   // length A
};

enum class Provenance { Original, Generated };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct QAPair {
  std::vector<std::string> question_words;
  std::vector<std::string> answer_words;
  Provenance provenance = Provenance::Original;
  // OCR token indices whose text is the answer; empty for
  // vocabulary-only answers.
  std::vector<int> answer_source_indices;
};

struct Scene {
  std::string image_id;
  double width = 0, height = 0;
  std::vector<ObjectRegion> objects;
  std::vector<OcrToken> ocr_tokens;
  std::vector<QAPair> qa_pairs;
};

struct SceneCheck {
  std::vector<std::string> violations;  // hard invariant failures
  std::vector<std::string> warnings;    // e.g. "no scene text"
  bool ok() const { return violations.empty(); }
};

// Checks every Scene invariant without mutating. Violations name the
// image_id and the offending field.
SceneCheck validate_scene(const Scene& scene);

// Index of the OCR token with maximal bbox area; ties broken by reading
// order (smaller y1, then smaller x1, then smaller index). Throws on a
// scene without scene text.
int largest_ocr_token(const Scene& scene);

}  // namespace tag
