#pragma once

#include <string>
#include <vector>

#include "tag/model.hpp"
#include "tag/scene.hpp"

namespace tag {

struct ExampleEval {
  std::string image_id;
  std::string question;
  std::string prediction;
  double accuracy = 0.0;
  double anls = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;  // mean of per-example accuracies
  double anls = 0.0;      // mean of per-example scores
  int n_examples = 0;
  std::vector<ExampleEval> examples;
};

// Greedy-decodes an answer for every QA pair of the split and scores it
// against the ground-truth answer replicated to the 10-reference
// interface.
EvalReport evaluate_vqa(const PointerModel& model, const std::vector<Scene>& split);

void write_eval_json(const EvalReport& report, const std::string& path);
// Rows: image_id, question, prediction, accuracy, anls.
void write_eval_csv(const EvalReport& report, const std::string& path);

}  // namespace tag
