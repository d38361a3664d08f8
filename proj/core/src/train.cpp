#include "tag/train.hpp"

#include <cmath>
#include <stdexcept>

#include "tag/hash.hpp"
#include "tag/optim.hpp"

namespace tag {

namespace {

struct Example {
  const Scene* scene;
  const QAPair* qa;
};

const std::vector<std::string>& lead_words(const Example& ex, Task task) {
  return task == Task::QuestionGeneration ? ex.qa->answer_words : ex.qa->question_words;
}

const std::vector<std::string>& target_words(const Example& ex, Task task) {
  return task == Task::QuestionGeneration ? ex.qa->question_words : ex.qa->answer_words;
}

// Mirrors the supervision rule of teacher_forced_loss so unsupervisable
// examples are filtered up front instead of aborting mid-run.
bool supervisable(const PointerModel& model, const Example& ex, Task task) {
  const auto& target = target_words(ex, task);
  if (target.empty()) return false;
  const auto& config = model.config();
  if (static_cast<int>(target.size()) + 1 <= config.t_cap) return true;  // <end> step supervises
  std::vector<std::string> ocr_texts;
  if (model.flags().use_ocr)
    for (const auto& tok : ex.scene->ocr_tokens) {
      if (static_cast<int>(ocr_texts.size()) >= config.n_cap) break;
      ocr_texts.push_back(tok.text);
    }
  for (int t = 0; t < config.t_cap; ++t) {
    const auto& w = target[static_cast<size_t>(t)];
    if (model.vocab().contains(w)) return true;
    for (const auto& o : ocr_texts)
      if (o == w) return true;
  }
  return false;
}

}  // namespace

TrainResult train_model(PointerModel& model, const std::vector<Scene>& train_scenes,
                        const TrainOptions& options) {
  const ModelConfig& config = model.config();

  std::vector<Example> examples;
  for (const Scene& scene : train_scenes)
    for (const QAPair& qa : scene.qa_pairs) {
      if (options.original_pairs_only && qa.provenance != Provenance::Original) continue;
      Example ex{&scene, &qa};
      if (supervisable(model, ex, options.task)) examples.push_back(ex);
    }
  if (examples.empty()) throw std::runtime_error("no trainable examples in corpus");

  LrSchedule schedule{config.lr, config.lr_decay_factor, config.lr_decay_steps};
  AdamState adam(model.params());
  Rng batch_rng(derive_seed(config.seed, "batch"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));

  TrainResult result;
  result.examples = static_cast<int>(examples.size());
  result.iterations = config.max_iters;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    model.params().zero_all_grads();
    Tensor batch_loss;
    for (int b = 0; b < config.batch_size; ++b) {
      const Example& ex = examples[batch_rng.uniform_int(examples.size())];
      FeatureBundle bundle = model.make_bundle(lead_words(ex, options.task), *ex.scene);
      LossReport report = model.teacher_forced_loss(bundle, target_words(ex, options.task),
                                                    &dropout_rng, /*training=*/true);
      batch_loss = batch_loss.defined() ? add(batch_loss, report.mean) : report.mean;
    }
    batch_loss = scale(batch_loss, 1.0 / config.batch_size);
    const double loss_value = batch_loss.item();
    if (!std::isfinite(loss_value))
      throw std::runtime_error("non-finite loss at iteration " + std::to_string(iter));

    backward(batch_loss);
    adam_step(model.params(), adam, schedule, iter);

    if (iter == 0) result.initial_loss = loss_value;
    if (iter == 0 || (options.log_every > 0 && iter % options.log_every == 0) ||
        iter == config.max_iters - 1)
      result.loss_curve.emplace_back(iter, loss_value);
    result.final_loss = loss_value;
  }
  return result;
}

double provenance_ratio(const std::vector<Scene>& scenes) {
  long long total = 0, original = 0;
  for (const Scene& scene : scenes)
    for (const QAPair& qa : scene.qa_pairs) {
      ++total;
      if (qa.provenance == Provenance::Original) ++original;
    }
  if (original == 0) throw std::runtime_error("corpus has no original pairs");
  return static_cast<double>(total) / static_cast<double>(original);
}

ModelConfig scale_schedule(ModelConfig config, double ratio) {
  if (!(ratio > 0)) throw std::runtime_error("schedule ratio must be positive");
  config.max_iters = static_cast<int>(std::llround(config.max_iters * ratio));
  for (int& s : config.lr_decay_steps) s = static_cast<int>(std::llround(s * ratio));
  return config;
}

}  // namespace tag
