#include "tag/scene.hpp"

#include <stdexcept>

#include "tag/text.hpp"

namespace tag {

const char* provenance_name(Provenance p) {
  return p == Provenance::Original ? "original" : "generated";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "original") return Provenance::Original;
  if (name == "generated") return Provenance::Generated;
  throw std::runtime_error("unknown provenance: " + name);
}

namespace {

bool is_normalized_word(const std::string& w) {
  if (w.empty()) return false;
  for (char c : w)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
  return true;
}

void check_bbox(const Scene& scene, const BBox& b, const std::string& where,
                std::vector<std::string>& out) {
  auto bad = [&](const std::string& what) { out.push_back(scene.image_id + ": " + where + " " + what); };
  if (!(b.x1 < b.x2)) bad("bbox has x2 <= x1");
  if (!(b.y1 < b.y2)) bad("bbox has y2 <= y1");
  if (b.x1 < 0 || b.y1 < 0) bad("bbox extends past the origin");
  if (b.x2 > scene.width || b.y2 > scene.height) bad("bbox extends past the image");
}

}  // namespace

SceneCheck validate_scene(const Scene& scene) {
  SceneCheck check;
  auto& v = check.violations;
  if (scene.image_id.empty()) v.push_back("scene has empty image_id");
  if (scene.width <= 0 || scene.height <= 0)
    v.push_back(scene.image_id + ": width/height must be positive");

  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& obj = scene.objects[i];
    const std::string where = "objects[" + std::to_string(i) + "]";
    if (!is_normalized_word(obj.class_label))
      v.push_back(scene.image_id + ": " + where + ".class_label empty or not lowercase [a-z0-9]");
    check_bbox(scene, obj.bbox, where + ".bbox", v);
  }

  for (size_t i = 0; i < scene.ocr_tokens.size(); ++i) {
    const auto& tok = scene.ocr_tokens[i];
    const std::string where = "ocr_tokens[" + std::to_string(i) + "]";
    if (tok.text.empty())
      v.push_back(scene.image_id + ": ocr.text empty at index " + std::to_string(i));
    else if (!is_normalized_word(tok.text))
      v.push_back(scene.image_id + ": " + where + ".text not normalized [a-z0-9]");
    check_bbox(scene, tok.bbox, where + ".bbox", v);
  }

  for (size_t i = 0; i < scene.qa_pairs.size(); ++i) {
    const auto& qa = scene.qa_pairs[i];
    const std::string where = "qa_pairs[" + std::to_string(i) + "]";
    if (qa.question_words.empty())
      v.push_back(scene.image_id + ": " + where + ".question empty");
    for (int idx : qa.answer_source_indices)
      if (idx < 0 || idx >= static_cast<int>(scene.ocr_tokens.size()))
        v.push_back(scene.image_id + ": " + where + ".answer_source_indices out of range: " +
                    std::to_string(idx));
  }

  if (scene.ocr_tokens.empty()) check.warnings.push_back(scene.image_id + ": no scene text");
  return check;
}

int largest_ocr_token(const Scene& scene) {
  if (scene.ocr_tokens.empty())
    throw std::runtime_error("no scene text in " + scene.image_id);
  int best = 0;
  for (int i = 1; i < static_cast<int>(scene.ocr_tokens.size()); ++i) {
    const BBox& a = scene.ocr_tokens[static_cast<size_t>(i)].bbox;
    const BBox& b = scene.ocr_tokens[static_cast<size_t>(best)].bbox;
    if (a.area() > b.area()) {
      best = i;
    } else if (a.area() == b.area()) {
      // reading order: higher on the image wins, then further left
      if (a.y1 < b.y1 || (a.y1 == b.y1 && a.x1 < b.x1)) best = i;
    }
  }
  return best;
}

}  // namespace tag
