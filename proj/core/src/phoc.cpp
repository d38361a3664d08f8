#include "tag/phoc.hpp"

#include <algorithm>
#include <stdexcept>

namespace tag {

namespace {

constexpr int kLevels[] = {2, 3, 4, 5};

// All intervals in units of 1/(n*level): gram = [gram_lo, gram_hi),
// region r = [r*n, (r+1)*n).
bool occupies(long long gram_lo, long long gram_hi, int region, long long n) {
  const long long r_lo = region * n;
  const long long r_hi = r_lo + n;
  const long long overlap = std::min(gram_hi, r_hi) - std::max(gram_lo, r_lo);
  if (overlap <= 0) return false;
  const long long smaller = std::min(gram_hi - gram_lo, n);
  return 2 * overlap >= smaller;
}

}  // namespace

int phoc_char_index(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= '0' && c <= '9') return 26 + (c - '0');
  return -1;
}

std::vector<double> phoc(const std::string& word, const std::vector<std::string>& bigrams) {
  if (word.empty()) throw std::runtime_error("phoc: empty word");
  for (char c : word)
    if (phoc_char_index(c) < 0)
      throw std::runtime_error("phoc: invalid character in '" + word + "'");
  if (bigrams.size() > static_cast<size_t>(kPhocBigramSlots))
    throw std::runtime_error("phoc: bigram list longer than 50");

  std::vector<double> bits(kPhocDim, 0.0);
  const long long n = static_cast<long long>(word.size());

  int level_offset = 0;
  for (int level : kLevels) {
    for (long long k = 0; k < n; ++k) {
      const int c = phoc_char_index(word[static_cast<size_t>(k)]);
      for (int r = 0; r < level; ++r)
        if (occupies(k * level, (k + 1) * level, r, n))
          bits[static_cast<size_t>(level_offset + r * kPhocAlphabet + c)] = 1.0;
    }
    level_offset += level * kPhocAlphabet;
  }

  for (size_t s = 0; s < bigrams.size(); ++s) {
    const std::string& bg = bigrams[s];
    for (long long k = 0; k + 1 < n; ++k) {
      if (word.compare(static_cast<size_t>(k), 2, bg) != 0) continue;
      for (int r = 0; r < 2; ++r)
        if (occupies(k * 2, (k + 2) * 2, r, n))
          bits[static_cast<size_t>(kPhocUnigramDim + r * kPhocBigramSlots + static_cast<int>(s))] = 1.0;
    }
  }
  return bits;
}

}  // namespace tag
