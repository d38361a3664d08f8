#include "tag/lexical.hpp"

#include <cmath>

#include "tag/hash.hpp"
#include "tag/rng.hpp"

namespace tag {

std::vector<double> lexical_embed(const std::string& word, int dim) {
  std::vector<double> v(static_cast<size_t>(dim), 0.0);
  const std::string wrapped = "^" + word + "$";
  if (wrapped.size() < 3) return v;
  for (size_t i = 0; i + 3 <= wrapped.size(); ++i) {
    Rng rng(derive_seed(fnv1a64(wrapped.substr(i, 3)), "lexical-trigram"));
    for (auto& x : v) x += rng.normal();
  }
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq <= 0.0) return v;
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& x : v) x *= inv;
  return v;
}

}  // namespace tag
