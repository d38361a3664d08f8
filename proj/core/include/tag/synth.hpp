#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tag/scene.hpp"

namespace tag {

// Deterministic synthetic stand-in for images + detector + OCR outputs.
// Scenes carry a handful of labeled object regions, at least
// ocr_per_scene_min scene-text tokens nested inside those regions, and
// exactly one template question per scene. Only a sparsity-controlled
// fraction of token-object associations is eligible to seed the
// annotation, so most scene text never appears in a question or answer.
struct SynthOptions {
  std::uint64_t seed = 13;
  int n_scenes = 200;
  int ocr_per_scene_min = 5;
  double annotation_sparsity = 0.4;
  int appearance_dim = 16;
  double image_width = 640;
  double image_height = 480;
};

struct SynthCorpus {
  std::vector<Scene> train, val, test;
};

// Closed word list the generator draws OCR texts from (~200 words over
// [a-z0-9], lengths 1..12).
const std::vector<std::string>& synth_lexicon();

// Object class labels the generator uses.
const std::vector<std::string>& synth_classes();

// Identity-determined appearance stand-in: unit-norm projection of the
// label/text, independent of the corpus seed. Instances add seeded noise
// of magnitude 0.1 on top.
std::vector<double> appearance_base(const std::string& identity, int dim);

// Pure function of its options. Splits 80/10/10 by image_id hash.
SynthCorpus synth_generate(const SynthOptions& options);

// 0..7 train, 8 val, 9 test.
int split_bucket(const std::string& image_id);

}  // namespace tag
