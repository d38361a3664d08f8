#pragma once

#include <string>
#include <vector>

#include "tag/scene.hpp"

namespace tag {

// JSON Lines corpus, one scene per line. Field names:
//   image_id, width, height,
//   objects[{class_label, bbox:[x1,y1,x2,y2], appearance:[...]}],
//   ocr_tokens[{text, bbox, appearance}],
//   qa_pairs[{question, answer, provenance, answer_source_indices}]
// Question/answer are stored as space-joined lowercase words.
// save -> load -> save is byte-identical.

std::vector<Scene> load_corpus(const std::string& path);
void save_corpus(const std::vector<Scene>& scenes, const std::string& path);

std::string scene_to_json_line(const Scene& scene);
Scene scene_from_json_line(const std::string& line);

}  // namespace tag
