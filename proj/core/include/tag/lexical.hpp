#pragma once

#include <string>
#include <vector>

namespace tag {

inline constexpr int kLexicalDim = 64;

// Frozen word embedding from the character-3-gram multiset of the word
// wrapped in boundary markers ("^word$"). Each trigram contributes a
// seeded Gaussian direction, the sum is L2-normalized, so words sharing
// trigrams land near each other. Not trained. Empty words map to zero.
std::vector<double> lexical_embed(const std::string& word, int dim = kLexicalDim);

}  // namespace tag
