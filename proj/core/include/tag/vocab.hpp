#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tag/scene.hpp"

namespace tag {

// Fixed frequent-word vocabulary shared by the question decoder and the
// teacher-forcing targets. Ids are dense from 0 with the four specials
// first, then training words by descending count (ties lexicographic).
// The top-50 character-bigram list used by the PHOC feature is frozen
// here too, since both are functions of the same training split.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBegin = 2;
  static constexpr int kEnd = 3;
  static constexpr int kNumSpecials = 4;

  // Words counted from question + answer text of every QA pair;
  // bigrams counted from those words plus all OCR texts.
  static Vocabulary build(const std::vector<Scene>& train_scenes);

  int id(const std::string& word) const;  // kUnk when absent
  const std::string& word(int id) const;
  bool contains(const std::string& word) const;
  int size() const { return static_cast<int>(words_.size()); }

  // Frozen bigram list, up to 50 entries, frequency order.
  const std::vector<std::string>& bigrams() const { return bigrams_; }

  // "word<TAB>id" per line, specials first; bigram list goes to
  // path + ".bigrams", one per line.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> words_;  // id -> word
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> bigrams_;

  void finish_index();
};

}  // namespace tag
