#pragma once

#include <string>
#include <vector>

namespace tag {

// Unit-cost insert/delete/substitute edit distance.
int levenshtein(const std::string& a, const std::string& b);

// Per reference: NL = distance / max(len); similarity 1 - NL when
// NL < 0.5 else 0; score is the max over references. Inputs are
// normalized (lowercase, [a-z0-9] words, single spaces) first.
double anls_score(const std::string& prediction, const std::vector<std::string>& references);

// Soft-voting accuracy min(matches / 3, 1) over exactly 10 normalized
// references; any other reference count throws.
double vqa_accuracy(const std::string& prediction, const std::vector<std::string>& references);

}  // namespace tag
