#include "tag/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tag {

namespace {

const char* kSpecials[] = {"<pad>", "<unk>", "<begin>", "<end>"};

void count_bigrams(const std::string& word, std::map<std::string, long long>& counts) {
  for (size_t i = 0; i + 1 < word.size(); ++i) counts[word.substr(i, 2)] += 1;
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<Scene>& train_scenes) {
  std::map<std::string, long long> word_counts;
  std::map<std::string, long long> bigram_counts;
  for (const Scene& scene : train_scenes) {
    for (const QAPair& qa : scene.qa_pairs) {
      for (const auto& w : qa.question_words) {
        word_counts[w] += 1;
        count_bigrams(w, bigram_counts);
      }
      for (const auto& w : qa.answer_words) {
        word_counts[w] += 1;
        count_bigrams(w, bigram_counts);
      }
    }
    for (const OcrToken& tok : scene.ocr_tokens) count_bigrams(tok.text, bigram_counts);
  }

  // Count descending, lexicographic on ties. std::map iteration already
  // yields the lexicographic order, so a stable sort by count suffices.
  std::vector<std::pair<std::string, long long>> ranked(word_counts.begin(), word_counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (const char* s : kSpecials) v.words_.push_back(s);
  for (const auto& [word, count] : ranked) {
    (void)count;
    v.words_.push_back(word);
  }

  std::vector<std::pair<std::string, long long>> bigrams(bigram_counts.begin(), bigram_counts.end());
  std::stable_sort(bigrams.begin(), bigrams.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (bigrams.size() > 50) bigrams.resize(50);
  for (const auto& [bg, count] : bigrams) {
    (void)count;
    v.bigrams_.push_back(bg);
  }

  v.finish_index();
  return v;
}

void Vocabulary::finish_index() {
  index_.clear();
  for (size_t i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = index_.emplace(words_[i], static_cast<int>(i));
    if (!inserted) throw std::runtime_error("duplicate vocabulary word '" + words_[i] + "'");
  }
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id out of range");
  return words_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(const std::string& word) const { return index_.count(word) > 0; }

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path);
  for (size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << i << '\n';
  std::ofstream bg(path + ".bigrams");
  if (!bg) throw std::runtime_error("cannot write bigram file " + path + ".bigrams");
  for (const auto& b : bigrams_) bg << b << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary file " + path);
  Vocabulary v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected word<TAB>id");
    const std::string word = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (id != static_cast<int>(v.words_.size()))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": ids must be dense from 0");
    v.words_.push_back(word);
  }
  if (v.words_.size() < static_cast<size_t>(kNumSpecials))
    throw std::runtime_error(path + ": vocabulary missing special tokens");
  for (int i = 0; i < kNumSpecials; ++i)
    if (v.words_[static_cast<size_t>(i)] != kSpecials[i])
      throw std::runtime_error(path + ": special token " + kSpecials[i] + " missing at id " +
                               std::to_string(i));

  std::ifstream bg(path + ".bigrams");
  if (!bg) throw std::runtime_error("cannot read bigram file " + path + ".bigrams");
  while (std::getline(bg, line))
    if (!line.empty()) v.bigrams_.push_back(line);
  if (v.bigrams_.size() > 50) throw std::runtime_error(path + ".bigrams: more than 50 bigrams");

  v.finish_index();
  return v;
}

}  // namespace tag
