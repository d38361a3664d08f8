#pragma once

#include <string>
#include <vector>

namespace tag {

// Pyramidal histogram of characters over [a-z0-9]. Levels 2..5 of
// unigram bits (14 regions x 36 characters = 504) followed by level-2
// bits for a frozen list of up to 50 bigrams (2 x 50 = 100), 604 total.
//
// Bit layout: unigram bit for (level l, region r, character c) lives at
// offset(l) + r*36 + c with levels packed in order 2,3,4,5; bigram bit
// for (region r, list slot s) lives at 504 + r*50 + s. Unused bigram
// slots stay zero.
inline constexpr int kPhocDim = 604;
inline constexpr int kPhocUnigramDim = 504;
inline constexpr int kPhocBigramSlots = 50;
inline constexpr int kPhocAlphabet = 36;

// Index of c within [a-z0-9], -1 for anything else.
int phoc_char_index(char c);

// Character k of an n-char word occupies [k/n, (k+1)/n); a bigram
// occupies the union of its two character intervals. A gram sets the
// bit of region r at level l when the overlap covers at least half of
// the smaller of the gram interval and the region. Computed in exact
// integer units of 1/(n*l).
std::vector<double> phoc(const std::string& word, const std::vector<std::string>& bigrams);

}  // namespace tag
