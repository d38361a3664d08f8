#pragma once

#include <string>
#include <vector>

namespace tag {

// Word normalization applied to every question/answer/OCR string:
// lowercase, strip everything outside [a-z0-9], collapse whitespace.
std::string normalize_word(const std::string& raw);
std::vector<std::string> normalize_words(const std::vector<std::string>& raw);

std::vector<std::string> split_words(const std::string& text);
std::string join_words(const std::vector<std::string>& words);

// Full-phrase normalization: per-word normalize, drop words that become
// empty, rejoin with single spaces.
std::string normalize_phrase(const std::string& raw);

}  // namespace tag
