#include "tag/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

#include "tag/text.hpp"

namespace tag {

using json = nlohmann::json;

namespace {

json bbox_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("bbox must be a 4-element array");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string scene_to_json_line(const Scene& scene) {
  json j;
  j["image_id"] = scene.image_id;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["objects"] = json::array();
  for (const auto& obj : scene.objects) {
    json o;
    o["class_label"] = obj.class_label;
    o["bbox"] = bbox_to_json(obj.bbox);
    o["appearance"] = obj.appearance;
    j["objects"].push_back(std::move(o));
  }
  j["ocr_tokens"] = json::array();
  for (const auto& tok : scene.ocr_tokens) {
    json t;
    t["text"] = tok.text;
    t["bbox"] = bbox_to_json(tok.bbox);
    t["appearance"] = tok.appearance;
    j["ocr_tokens"].push_back(std::move(t));
  }
  j["qa_pairs"] = json::array();
  for (const auto& qa : scene.qa_pairs) {
    json q;
    q["question"] = join_words(qa.question_words);
    q["answer"] = join_words(qa.answer_words);
    q["provenance"] = provenance_name(qa.provenance);
    q["answer_source_indices"] = qa.answer_source_indices;
    j["qa_pairs"].push_back(std::move(q));
  }
  return j.dump();
}

Scene scene_from_json_line(const std::string& line) {
  json j = json::parse(line);
  Scene scene;
  scene.image_id = j.at("image_id").get<std::string>();
  scene.width = j.at("width").get<double>();
  scene.height = j.at("height").get<double>();
  for (const auto& o : j.at("objects")) {
    ObjectRegion obj;
    obj.class_label = o.at("class_label").get<std::string>();
    obj.bbox = bbox_from_json(o.at("bbox"));
    obj.appearance = o.at("appearance").get<std::vector<double>>();
    scene.objects.push_back(std::move(obj));
  }
  for (const auto& t : j.at("ocr_tokens")) {
    OcrToken tok;
    tok.text = t.at("text").get<std::string>();
    tok.bbox = bbox_from_json(t.at("bbox"));
    tok.appearance = t.at("appearance").get<std::vector<double>>();
    scene.ocr_tokens.push_back(std::move(tok));
  }
  for (const auto& q : j.at("qa_pairs")) {
    QAPair qa;
    qa.question_words = split_words(q.at("question").get<std::string>());
    qa.answer_words = split_words(q.at("answer").get<std::string>());
    qa.provenance = provenance_from_name(q.at("provenance").get<std::string>());
    qa.answer_source_indices = q.at("answer_source_indices").get<std::vector<int>>();
    scene.qa_pairs.push_back(std::move(qa));
  }
  return scene;
}

std::vector<Scene> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus: " + path);
  std::vector<Scene> scenes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Scene scene;
    try {
      scene = scene_from_json_line(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed scene: " + e.what());
    }
    auto check = validate_scene(scene);
    if (!check.ok())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": invalid scene: " + check.violations.front());
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void save_corpus(const std::vector<Scene>& scenes, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open corpus for writing: " + path);
  for (const auto& scene : scenes) out << scene_to_json_line(scene) << "\n";
  if (!out) throw std::runtime_error("corpus write failed: " + path);
}

}  // namespace tag
