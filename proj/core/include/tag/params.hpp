#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tag/tensor.hpp"

namespace tag {

// Ordered registry of named trainable tensors. Iteration order is
// insertion order, which fixes the checkpoint layout and the optimizer
// state alignment.
class ParamRegistry {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  size_t size() const { return entries_.size(); }
  const std::string& name(size_t i) const { return entries_[i].first; }
  Tensor& tensor(size_t i) { return entries_[i].second; }
  const Tensor& tensor(size_t i) const { return entries_[i].second; }

  std::int64_t total_numel() const;
  void zero_all_grads();

  // Binary checkpoint. save -> load -> save round-trips byte-identically.
  void save(const std::string& path) const;
  // Overwrites values of already-registered parameters; every name in
  // the file must exist here with a matching shape, and vice versa.
  void load(const std::string& path);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// Fresh trainable tensor with entries ~ normal(0, stddev) drawn from rng.
Tensor init_normal(Shape shape, double stddev, Rng& rng);

}  // namespace tag
