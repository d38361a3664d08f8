#pragma once

#include <string>
#include <vector>

#include "tag/config.hpp"
#include "tag/scene.hpp"
#include "tag/synth.hpp"
#include "tag/vocab.hpp"

namespace test_helpers {

// Small config sized for the synthetic scenes (<= 4 objects, <= 8 OCR
// tokens, questions <= 6 words).
inline tag::ModelConfig tiny_config() {
  tag::ModelConfig c;
  c.d = 16;
  c.layers = 1;
  c.heads = 2;
  c.k_cap = 24;
  c.m_cap = 4;
  c.n_cap = 8;
  c.t_cap = 8;
  c.dropout = 0.0;
  c.lr = 1e-3;
  c.batch_size = 8;
  c.max_iters = 20;
  c.lr_decay_steps = {};
  c.lr_decay_factor = 0.1;
  c.seed = 13;
  return c;
}

inline std::vector<tag::Scene> tiny_corpus(int n_scenes = 24, std::uint64_t seed = 13) {
  tag::SynthOptions opt;
  opt.seed = seed;
  opt.n_scenes = n_scenes;
  auto corpus = tag::synth_generate(opt);
  return corpus.train;
}

inline tag::Scene hand_scene() {
  tag::Scene scene;
  scene.image_id = "hand-0";
  scene.width = 100;
  scene.height = 200;
  scene.objects.push_back({"sign", {10, 10, 60, 90}, {0.5, -0.5}});
  scene.objects.push_back({"book", {60, 100, 95, 190}, {0.25, 0.75}});
  scene.ocr_tokens.push_back({"stop", {12, 12, 40, 30}, {1.0, 0.0}});
  scene.ocr_tokens.push_back({"exit", {62, 110, 90, 150}, {0.0, 1.0}});
  scene.ocr_tokens.push_back({"go", {15, 40, 30, 50}, {0.5, 0.5}});
  tag::QAPair qa;
  qa.question_words = {"what", "is", "written", "on", "the", "sign"};
  qa.answer_words = {"stop"};
  qa.answer_source_indices = {0};
  scene.qa_pairs.push_back(qa);
  return scene;
}

}  // namespace test_helpers
