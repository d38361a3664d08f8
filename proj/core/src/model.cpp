#include "tag/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "tag/hash.hpp"

namespace tag {

const char* task_name(Task task) {
  return task == Task::QuestionGeneration ? "question-generation" : "answering";
}

Task task_from_name(const std::string& name) {
  if (name == "question-generation") return Task::QuestionGeneration;
  if (name == "answering") return Task::Answering;
  throw std::runtime_error("unknown task name: " + name);
}

PointerModel::PointerModel(const ModelConfig& config, Vocabulary vocab, int appearance_dim,
                           ModelFlags flags)
    : config_(config), vocab_(std::move(vocab)), flags_(flags), appearance_dim_(appearance_dim) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, "model-init"));
  tables_ = std::make_unique<EmbeddingTables>(config_, vocab_.size(), appearance_dim_, rng, params_);
  fusion_ = std::make_unique<TransformerParams>(config_, rng, params_);
  decoder_ = std::make_unique<DecoderParams>(config_, vocab_.size(), rng, params_);
}

FeatureBundle PointerModel::make_bundle(const std::vector<std::string>& lead_words,
                                        const Scene& scene) const {
  FeatureBundle b;

  std::vector<std::string> obj_labels;
  if (flags_.use_obj)
    for (const auto& obj : scene.objects) obj_labels.push_back(obj.class_label);

  std::vector<OcrToken> ocr;
  if (flags_.use_ocr) {
    ocr = scene.ocr_tokens;
    if (static_cast<int>(ocr.size()) > config_.n_cap) ocr.resize(static_cast<size_t>(config_.n_cap));
  }
  std::vector<std::string> ocr_words;
  for (const auto& tok : ocr) ocr_words.push_back(tok.text);

  const std::vector<std::string> no_words;
  b.f_ans = embed_answer_extended(lead_words, flags_.extend_text ? obj_labels : no_words,
                                  flags_.extend_text ? ocr_words : no_words, *tables_, vocab_,
                                  config_, &b.k_used);
  b.f_obj = embed_objects(flags_.use_obj ? scene.objects : std::vector<ObjectRegion>{}, scene.width,
                          scene.height, *tables_, config_, &b.m_used);
  b.f_ocr = embed_ocr(ocr, scene.width, scene.height, *tables_, vocab_, config_, &b.n_used);
  b.ocr_texts = std::move(ocr_words);
  return b;
}

DecodedToken PointerModel::input_token_for_word(const std::string& word,
                                               const FeatureBundle& bundle) const {
  if (vocab_.contains(word)) return {false, vocab_.id(word)};
  for (int j = 0; j < bundle.n_used; ++j)
    if (bundle.ocr_texts[static_cast<size_t>(j)] == word) return {true, j};
  return {false, Vocabulary::kUnk};
}

Tensor PointerModel::decode_inputs(const std::vector<DecodedToken>& prev_tokens,
                                   const FeatureBundle& bundle, int t_used) const {
  std::vector<Tensor> rows;
  rows.reserve(static_cast<size_t>(t_used) + 1);
  for (int t = 0; t < t_used; ++t) {
    const DecodedToken prev =
        t == 0 ? DecodedToken{false, Vocabulary::kBegin} : prev_tokens[static_cast<size_t>(t - 1)];
    rows.push_back(step_input_embedding(prev, t, bundle, *tables_));
  }
  if (t_used < config_.t_cap) rows.push_back(Tensor::zeros({config_.t_cap - t_used, config_.d}));
  return concat_rows(rows);
}

LossReport PointerModel::teacher_forced_loss(const FeatureBundle& bundle,
                                             const std::vector<std::string>& target_words,
                                             Rng* dropout_rng, bool training) const {
  if (target_words.empty()) throw std::runtime_error("teacher_forced_loss: empty target sequence");
  const int K = config_.k_cap, M = config_.m_cap, N = config_.n_cap;
  const int t_used = std::min<int>(static_cast<int>(target_words.size()) + 1, config_.t_cap);

  std::vector<DecodedToken> gt_tokens;
  for (int t = 0; t + 1 < t_used; ++t)
    gt_tokens.push_back(input_token_for_word(target_words[static_cast<size_t>(t)], bundle));

  Tensor decode = decode_inputs(gt_tokens, bundle, t_used);
  Tensor mask = build_mask({bundle.k_used, bundle.m_used, bundle.n_used, t_used}, config_);
  Tensor joint = build_joint_sequence(bundle, decode, config_);
  Tensor enriched = transformer_forward(joint, mask, *fusion_, config_, dropout_rng, training);
  Tensor ocr_enriched = slice_rows(enriched, K + M, K + M + N);
  Tensor decode_rows = slice_rows(enriched, K + M + N, K + M + N + t_used);
  Tensor logits = decode_scores(decode_rows, ocr_enriched, *decoder_);

  const auto valid = step_valid_mask(vocab_.size(), bundle.n_used, config_.n_cap);
  LossReport report;
  Tensor sum_loss;
  for (int t = 0; t < t_used; ++t) {
    std::vector<double> target;
    bool supervised = true;
    if (t < static_cast<int>(target_words.size())) {
      target = step_target(target_words[static_cast<size_t>(t)], vocab_, bundle.ocr_texts,
                           bundle.n_used, config_.n_cap, &supervised);
    } else {
      target.assign(static_cast<size_t>(vocab_.size() + config_.n_cap), 0.0);
      target[Vocabulary::kEnd] = 1.0;
    }
    if (!supervised) continue;
    Tensor step_loss = bce_with_logits_mean(slice_rows(logits, t, t + 1), target, valid);
    report.per_step.push_back(step_loss.item());
    ++report.supervised_steps;
    sum_loss = sum_loss.defined() ? add(sum_loss, step_loss) : step_loss;
  }
  if (report.supervised_steps == 0) throw std::runtime_error("unsupervisable example");
  report.mean = scale(sum_loss, 1.0 / report.supervised_steps);
  return report;
}

std::vector<DecodedToken> PointerModel::decode_greedy(const FeatureBundle& bundle) const {
  NoGradGuard no_grad;
  const int K = config_.k_cap, M = config_.m_cap, N = config_.n_cap;
  DecodeState state;
  while (!state.finished && state.t < config_.t_cap) {
    const int t_used = state.t + 1;
    Tensor decode = decode_inputs(state.emitted, bundle, t_used);
    Tensor mask = build_mask({bundle.k_used, bundle.m_used, bundle.n_used, t_used}, config_);
    Tensor joint = build_joint_sequence(bundle, decode, config_);
    Tensor enriched = transformer_forward(joint, mask, *fusion_, config_);
    Tensor ocr_enriched = slice_rows(enriched, K + M, K + M + N);
    Tensor decode_rows = slice_rows(enriched, K + M + N, K + M + N + t_used);
    Tensor logits = decode_scores(decode_rows, ocr_enriched, *decoder_);
    OutputScores scores = extract_scores(logits, state.t, vocab_.size(), bundle.n_used);
    DecodedToken next = argmax_token(scores);
    if (!next.from_ocr && next.index == Vocabulary::kEnd) {
      state.finished = true;
    } else {
      state.emitted.push_back(next);
    }
    ++state.t;
  }
  return state.emitted;
}

void save_model_bundle(const PointerModel& model, Task task, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  model.params().save((base / "checkpoint.bin").string());
  save_config(model.config(), (base / "config.cfg").string());
  model.vocab().save((base / "vocab.txt").string());

  nlohmann::json meta;
  meta["task"] = task_name(task);
  meta["appearance_dim"] = model.appearance_dim();
  meta["use_obj"] = model.flags().use_obj;
  meta["use_ocr"] = model.flags().use_ocr;
  meta["extend_text"] = model.flags().extend_text;
  meta["vocab_size"] = model.vocab().size();
  std::ofstream out(base / "meta.json");
  if (!out) throw std::runtime_error("cannot write model meta " + (base / "meta.json").string());
  out << meta.dump(2) << '\n';
}

ModelBundle load_model_bundle(const std::string& dir) {
  const std::filesystem::path base(dir);
  std::ifstream meta_in(base / "meta.json");
  if (!meta_in) throw std::runtime_error("missing model meta " + (base / "meta.json").string());
  nlohmann::json meta = nlohmann::json::parse(meta_in);

  ModelBundle bundle;
  bundle.task = task_from_name(meta.at("task").get<std::string>());
  ModelFlags flags;
  flags.use_obj = meta.at("use_obj").get<bool>();
  flags.use_ocr = meta.at("use_ocr").get<bool>();
  flags.extend_text = meta.at("extend_text").get<bool>();

  ModelConfig config = load_config((base / "config.cfg").string());
  Vocabulary vocab = Vocabulary::load((base / "vocab.txt").string());
  bundle.model = std::make_unique<PointerModel>(config, std::move(vocab),
                                                meta.at("appearance_dim").get<int>(), flags);
  bundle.model->params().load((base / "checkpoint.bin").string());
  return bundle;
}

std::vector<std::string> PointerModel::words_for(const std::vector<DecodedToken>& tokens,
                                                 const FeatureBundle& bundle) const {
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (const DecodedToken& tok : tokens) {
    if (tok.from_ocr) {
      if (tok.index < 0 || tok.index >= bundle.n_used)
        throw std::runtime_error("decoded OCR index out of range");
      words.push_back(bundle.ocr_texts[static_cast<size_t>(tok.index)]);
    } else {
      words.push_back(vocab_.word(tok.index));
    }
  }
  return words;
}

}  // namespace tag
