#include "tag/vqa.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "tag/metrics.hpp"
#include "tag/text.hpp"

namespace tag {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

EvalReport evaluate_vqa(const PointerModel& model, const std::vector<Scene>& split) {
  EvalReport report;
  for (const Scene& scene : split) {
    for (const QAPair& qa : scene.qa_pairs) {
      FeatureBundle bundle = model.make_bundle(qa.question_words, scene);
      const auto tokens = model.decode_greedy(bundle);
      ExampleEval ex;
      ex.image_id = scene.image_id;
      ex.question = join_words(qa.question_words);
      ex.prediction = join_words(model.words_for(tokens, bundle));
      const std::vector<std::string> references(10, join_words(qa.answer_words));
      ex.accuracy = vqa_accuracy(ex.prediction, references);
      ex.anls = anls_score(ex.prediction, references);
      report.accuracy += ex.accuracy;
      report.anls += ex.anls;
      report.examples.push_back(std::move(ex));
    }
  }
  report.n_examples = static_cast<int>(report.examples.size());
  if (report.n_examples > 0) {
    report.accuracy /= report.n_examples;
    report.anls /= report.n_examples;
  }
  return report;
}

void write_eval_json(const EvalReport& report, const std::string& path) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["anls"] = report.anls;
  j["n_examples"] = report.n_examples;
  auto rows = nlohmann::json::array();
  for (const auto& ex : report.examples) {
    nlohmann::json r;
    r["image_id"] = ex.image_id;
    r["question"] = ex.question;
    r["prediction"] = ex.prediction;
    r["accuracy"] = ex.accuracy;
    r["anls"] = ex.anls;
    rows.push_back(std::move(r));
  }
  j["examples"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write eval report " + path);
  out << j.dump(2) << '\n';
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write eval csv " + path);
  out << "image_id,question,prediction,accuracy,anls\n";
  for (const auto& ex : report.examples)
    out << ex.image_id << ',' << ex.question << ',' << ex.prediction << ','
        << format_double(ex.accuracy) << ',' << format_double(ex.anls) << '\n';
}

}  // namespace tag
