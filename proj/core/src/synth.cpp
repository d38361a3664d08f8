#include "tag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tag/hash.hpp"
#include "tag/rng.hpp"

namespace tag {

namespace {

std::vector<std::string> build_lexicon() {
  // Signage-flavored base vocabulary plus short digit strings and
  // single characters, padded with pronounceable two/three-syllable
  // nonwords up to 200 entries.
  std::vector<std::string> words = {
      "stop", "exit", "open", "sale", "menu", "cafe", "pizza", "cola", "hotel", "motel",
      "bank", "shop", "store", "north", "south", "east", "west", "main", "street", "road",
      "park", "free", "wifi", "taxi", "metro", "tickets", "push", "pull", "enter", "closed",
      "fresh", "daily", "bakery", "books", "music", "cinema", "market", "plaza", "center", "museum",
      "airport", "station", "express", "local", "diner", "grill", "sushi", "tacos", "burger", "fries",
      "coffee", "tea", "juice", "milk", "water", "soda", "beer", "wine", "bread", "cheese",
      "school", "library", "garden", "bridge", "tower", "river", "beach", "harbor", "castle", "temple",
      "one", "two", "three", "ten", "half", "price", "off", "new", "old", "big",
      "a", "x", "7", "24", "99", "42", "365", "2020", "a1", "b2",
      "no1", "7up", "h2o", "4x4", "u2", "go", "in", "out", "up", "down",
  };
  const std::string consonants = "bdfgklmnprstvz";
  const std::string vowels = "aeiou";
  std::vector<std::string> syllables;
  for (char c : consonants)
    for (char v : vowels) syllables.push_back(std::string{c, v});
  // Deterministic enumeration; skip anything already present.
  size_t i = 0, j = 17, k = 5;
  while (words.size() < 200) {
    std::string w = syllables[i % syllables.size()] + syllables[j % syllables.size()];
    if (words.size() % 3 == 0) w += syllables[k % syllables.size()];
    i += 7;
    j += 11;
    k += 13;
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
  }
  return words;
}

}  // namespace

const std::vector<std::string>& synth_lexicon() {
  static const std::vector<std::string> lexicon = build_lexicon();
  return lexicon;
}

const std::vector<std::string>& synth_classes() {
  static const std::vector<std::string> classes = {"sign", "bottle", "book", "bus", "shirt"};
  return classes;
}

std::vector<double> appearance_base(const std::string& identity, int dim) {
  Rng rng(derive_seed(fnv1a64(identity), "appearance-base"));
  std::vector<double> v(static_cast<size_t>(dim));
  double norm_sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm_sq += x * x;
  }
  double inv = 1.0 / std::sqrt(norm_sq > 0 ? norm_sq : 1.0);
  for (auto& x : v) x *= inv;
  return v;
}

int split_bucket(const std::string& image_id) {
  return static_cast<int>(fnv1a64("split:" + image_id) % 10);
}

namespace {

std::vector<double> appearance_with_noise(const std::string& identity, int dim, Rng& rng) {
  auto v = appearance_base(identity, dim);
  for (auto& x : v) x += 0.1 * rng.normal();
  return v;
}

Scene make_scene(const SynthOptions& opt, int index) {
  Rng rng(derive_seed(opt.seed, "synth-scene", static_cast<std::uint64_t>(index)));
  Scene scene;
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth%llu-%05d", static_cast<unsigned long long>(opt.seed), index);
    scene.image_id = buf;
  }
  scene.width = opt.image_width;
  scene.height = opt.image_height;

  const int n_obj = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4

  // Classes without replacement so "what is written on the <class>?"
  // names a unique region.
  std::vector<std::string> classes = synth_classes();
  for (size_t i = classes.size(); i > 1; --i)
    std::swap(classes[i - 1], classes[rng.uniform_int(i)]);
  classes.resize(static_cast<size_t>(n_obj));

  // One object per quadrant keeps regions disjoint, so each token nests
  // inside exactly one object.
  std::vector<int> cells = {0, 1, 2, 3};
  for (size_t i = cells.size(); i > 1; --i)
    std::swap(cells[i - 1], cells[rng.uniform_int(i)]);
  const double cw = opt.image_width / 2, ch = opt.image_height / 2;
  for (int i = 0; i < n_obj; ++i) {
    const double cx = (cells[static_cast<size_t>(i)] % 2) * cw;
    const double cy = (cells[static_cast<size_t>(i)] / 2) * ch;
    ObjectRegion obj;
    obj.class_label = classes[static_cast<size_t>(i)];
    obj.bbox.x1 = cx + rng.uniform_range(4, 24);
    obj.bbox.y1 = cy + rng.uniform_range(4, 24);
    obj.bbox.x2 = cx + cw - rng.uniform_range(4, 24);
    obj.bbox.y2 = cy + ch - rng.uniform_range(4, 24);
    obj.appearance = appearance_with_noise(obj.class_label, opt.appearance_dim, rng);
    scene.objects.push_back(std::move(obj));
  }

  const auto& lexicon = synth_lexicon();
  const int n_tok = opt.ocr_per_scene_min + static_cast<int>(rng.uniform_int(4));
  std::vector<int> host_of(static_cast<size_t>(n_tok));
  for (int t = 0; t < n_tok; ++t) {
    const int host = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_obj)));
    host_of[static_cast<size_t>(t)] = host;
    const BBox& ob = scene.objects[static_cast<size_t>(host)].bbox;
    OcrToken tok;
    tok.text = lexicon[rng.uniform_int(lexicon.size())];
    const double ow = ob.x2 - ob.x1, oh = ob.y2 - ob.y1;
    const double tw = rng.uniform_range(18, 0.45 * ow);
    const double th = rng.uniform_range(8, 0.30 * oh);
    tok.bbox.x1 = rng.uniform_range(ob.x1, ob.x2 - tw);
    tok.bbox.y1 = rng.uniform_range(ob.y1, ob.y2 - th);
    tok.bbox.x2 = tok.bbox.x1 + tw;
    tok.bbox.y2 = tok.bbox.y1 + th;
    tok.appearance = appearance_with_noise(tok.text, opt.appearance_dim, rng);
    scene.ocr_tokens.push_back(std::move(tok));
  }

  // Sparsity gate: only these token-object associations may seed the
  // annotation. The rest of the scene text stays unused.
  std::vector<int> eligible;
  for (int t = 0; t < n_tok; ++t)
    if (rng.uniform() < opt.annotation_sparsity) eligible.push_back(t);
  if (eligible.empty()) eligible.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_tok))));

  QAPair qa;
  qa.provenance = Provenance::Original;
  if (rng.uniform() < 0.5) {
    // "what word is the largest?" -> globally largest token.
    const int idx = largest_ocr_token(scene);
    qa.question_words = {"what", "word", "is", "the", "largest"};
    qa.answer_words = {scene.ocr_tokens[static_cast<size_t>(idx)].text};
    qa.answer_source_indices = {idx};
  } else {
    // "what is written on the <class>?" -> the dominant (largest) token
    // on the object hosting an eligible association.
    const int seed_tok = eligible[rng.uniform_int(eligible.size())];
    const int host = host_of[static_cast<size_t>(seed_tok)];
    int answer_idx = -1;
    double best_area = -1;
    for (int t = 0; t < n_tok; ++t) {
      if (host_of[static_cast<size_t>(t)] != host) continue;
      const double a = scene.ocr_tokens[static_cast<size_t>(t)].bbox.area();
      if (a > best_area) {
        best_area = a;
        answer_idx = t;
      }
    }
    qa.question_words = {"what", "is", "written", "on", "the",
                         scene.objects[static_cast<size_t>(host)].class_label};
    qa.answer_words = {scene.ocr_tokens[static_cast<size_t>(answer_idx)].text};
    qa.answer_source_indices = {answer_idx};
  }
  scene.qa_pairs.push_back(std::move(qa));
  return scene;
}

}  // namespace

SynthCorpus synth_generate(const SynthOptions& opt) {
  if (opt.n_scenes < 10) throw std::runtime_error("synth_generate requires n_scenes >= 10");
  if (opt.ocr_per_scene_min < 1) throw std::runtime_error("synth_generate requires ocr_per_scene_min >= 1");
  if (!(opt.annotation_sparsity > 0.0 && opt.annotation_sparsity <= 1.0))
    throw std::runtime_error("synth_generate requires 0 < annotation_sparsity <= 1");

  SynthCorpus corpus;
  for (int i = 0; i < opt.n_scenes; ++i) {
    Scene scene = make_scene(opt, i);
    switch (split_bucket(scene.image_id)) {
      case 8:
        corpus.val.push_back(std::move(scene));
        break;
      case 9:
        corpus.test.push_back(std::move(scene));
        break;
      default:
        corpus.train.push_back(std::move(scene));
    }
  }
  return corpus;
}

}  // namespace tag
