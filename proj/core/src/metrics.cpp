#include "tag/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "tag/text.hpp"

namespace tag {

int levenshtein(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double anls_score(const std::string& prediction, const std::vector<std::string>& references) {
  if (references.empty()) throw std::runtime_error("anls_score requires at least one reference");
  const std::string pred = normalize_phrase(prediction);
  double best = 0.0;
  for (const auto& raw : references) {
    const std::string ref = normalize_phrase(raw);
    const size_t longest = std::max(pred.size(), ref.size());
    if (longest == 0) {
      best = std::max(best, 1.0);  // both empty after normalization
      continue;
    }
    const double nl = static_cast<double>(levenshtein(pred, ref)) / static_cast<double>(longest);
    if (nl < 0.5) best = std::max(best, 1.0 - nl);
  }
  return best;
}

double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& references) {
  if (references.size() != 10)
    throw std::runtime_error("vqa_accuracy requires exactly 10 references, got " +
                             std::to_string(references.size()));
  const std::string pred = normalize_phrase(prediction);
  int matches = 0;
  for (const auto& raw : references)
    if (normalize_phrase(raw) == pred) ++matches;
  return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

}  // namespace tag
