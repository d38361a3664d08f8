#include "tag/text.hpp"

#include <cctype>
#include <sstream>

namespace tag {

std::string normalize_word(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    unsigned char lc = static_cast<unsigned char>(std::tolower(c));
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9')) out.push_back(static_cast<char>(lc));
  }
  return out;
}

std::vector<std::string> normalize_words(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& w : raw) {
    std::string n = normalize_word(w);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string normalize_phrase(const std::string& raw) {
  return join_words(normalize_words(split_words(raw)));
}

}  // namespace tag
