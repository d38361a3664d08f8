#include "tag/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "tag/hash.hpp"
#include "tag/text.hpp"

namespace tag {

AnswerSelectionStrategy AnswerSelectionStrategy::parse(const std::string& text, std::uint64_t seed) {
  AnswerSelectionStrategy s;
  s.seed = seed;
  if (text == "largest") {
    s.kind = Kind::Largest;
    return s;
  }
  if (text == "random") {
    s.kind = Kind::Random;
    return s;
  }
  if (text.rfind("top", 0) == 0) {
    size_t pos = 3;
    if (pos < text.size() && (text[pos] == '_' || text[pos] == '-')) ++pos;
    const std::string digits = text.substr(pos);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
      s.kind = Kind::TopK;
      s.k = std::stoi(digits);
      if (s.k >= 1) return s;
    }
  }
  throw std::runtime_error("unknown answer-selection strategy '" + text +
                           "' (expected largest, random, or top_<k>)");
}

std::string AnswerSelectionStrategy::name() const {
  switch (kind) {
    case Kind::Largest: return "largest";
    case Kind::Random: return "random";
    case Kind::TopK: return "top_" + std::to_string(k);
  }
  return "largest";
}

std::vector<int> select_answers(const Scene& scene, const AnswerSelectionStrategy& strategy) {
  const int n = static_cast<int>(scene.ocr_tokens.size());
  if (n == 0) return {};
  switch (strategy.kind) {
    case AnswerSelectionStrategy::Kind::Largest:
      return {largest_ocr_token(scene)};
    case AnswerSelectionStrategy::Kind::Random: {
      Rng rng(derive_seed(strategy.seed, scene.image_id));
      return {static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)))};
    }
    case AnswerSelectionStrategy::Kind::TopK: {
      std::vector<int> order(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const BBox& ba = scene.ocr_tokens[static_cast<size_t>(a)].bbox;
        const BBox& bb = scene.ocr_tokens[static_cast<size_t>(b)].bbox;
        if (ba.area() != bb.area()) return ba.area() > bb.area();
        if (ba.y1 != bb.y1) return ba.y1 < bb.y1;
        if (ba.x1 != bb.x1) return ba.x1 < bb.x1;
        return a < b;
      });
      if (static_cast<int>(order.size()) > strategy.k) order.resize(static_cast<size_t>(strategy.k));
      return order;
    }
  }
  return {};
}

GenerationOutcome generate_pair(const PointerModel& tag_model, const Scene& scene, int ocr_index) {
  if (ocr_index < 0 || ocr_index >= static_cast<int>(scene.ocr_tokens.size()))
    throw std::runtime_error("generate_pair: OCR index out of range for " + scene.image_id);
  GenerationOutcome outcome;
  const std::string& answer = scene.ocr_tokens[static_cast<size_t>(ocr_index)].text;

  FeatureBundle bundle = tag_model.make_bundle({answer}, scene);
  const auto tokens = tag_model.decode_greedy(bundle);
  const auto question = tag_model.words_for(tokens, bundle);

  outcome.pair.question_words = question;
  outcome.pair.answer_words = {answer};
  outcome.pair.provenance = Provenance::Generated;
  outcome.pair.answer_source_indices = {ocr_index};
  for (const DecodedToken& tok : tokens)
    outcome.per_step_source.push_back(tok.from_ocr ? "ocr:" + std::to_string(tok.index) : "vocab");

  if (question.empty()) {
    outcome.reject_reason = "empty";
    return outcome;
  }
  const std::string joined = join_words(question);
  for (const QAPair& qa : scene.qa_pairs) {
    if (qa.provenance == Provenance::Original && join_words(qa.question_words) == joined) {
      outcome.reject_reason = "duplicate";
      return outcome;
    }
  }
  outcome.accepted = true;
  return outcome;
}

AugmentResult augment(const std::vector<Scene>& train_scenes, const PointerModel& tag_model,
                      const AnswerSelectionStrategy& strategy) {
  AugmentResult result;
  result.scenes = train_scenes;
  result.stats.strategy = strategy.name();
  result.stats.seed = strategy.seed;
  result.stats.scenes = static_cast<int>(train_scenes.size());

  std::set<std::string> original_answers;
  for (const Scene& scene : train_scenes)
    for (const QAPair& qa : scene.qa_pairs)
      if (qa.provenance == Provenance::Original) original_answers.insert(join_words(qa.answer_words));

  std::set<std::string> novel_answers;
  for (Scene& scene : result.scenes) {
    for (int idx : select_answers(scene, strategy)) {
      GenerationOutcome outcome = generate_pair(tag_model, scene, idx);
      if (!outcome.accepted) {
        if (outcome.reject_reason == "empty") ++result.stats.rejected_empty;
        else ++result.stats.rejected_duplicate;
        continue;
      }
      ++result.stats.generated;
      result.stats.generated_tokens += static_cast<int>(outcome.per_step_source.size());
      for (const auto& src : outcome.per_step_source)
        if (src != "vocab") ++result.stats.copied_tokens;
      const std::string answer = join_words(outcome.pair.answer_words);
      if (!original_answers.count(answer)) novel_answers.insert(answer);
      result.dump.push_back({scene.image_id, answer, join_words(outcome.pair.question_words),
                             outcome.per_step_source});
      scene.qa_pairs.push_back(std::move(outcome.pair));
    }
  }
  result.stats.novel_answer_texts = static_cast<int>(novel_answers.size());
  return result;
}

void write_augment_manifest(const AugmentStats& stats, const std::string& path) {
  nlohmann::json j;
  j["strategy"] = stats.strategy;
  j["seed"] = stats.seed;
  j["scenes"] = stats.scenes;
  j["generated"] = stats.generated;
  j["rejected_empty"] = stats.rejected_empty;
  j["rejected_duplicate"] = stats.rejected_duplicate;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write augment manifest " + path);
  out << j.dump(2) << '\n';
}

void write_generation_dump(const std::vector<DumpRecord>& dump, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write generation dump " + path);
  for (const auto& rec : dump) {
    nlohmann::json j;
    j["image_id"] = rec.image_id;
    j["answer"] = rec.answer;
    j["generated_question"] = rec.generated_question;
    j["per_step_source"] = rec.per_step_source;
    out << j.dump() << '\n';
  }
}

}  // namespace tag
