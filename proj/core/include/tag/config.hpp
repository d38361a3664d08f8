#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tag {

// Model + training knobs, serialized as plain key=value text. Defaults
// are the desk-scale configuration; paper-scale values are reachable by
// editing the file.
struct ModelConfig {
  int d = 64;
  int layers = 2;
  int heads = 4;
  int k_cap = 40;  // extended answer words
  int m_cap = 8;   // objects
  int n_cap = 12;  // OCR tokens
  int t_cap = 12;  // decoding steps
  double dropout = 0.1;
  double lr = 1e-4;
  int batch_size = 32;
  int max_iters = 2000;
  std::vector<int> lr_decay_steps = {1200, 1600};
  double lr_decay_factor = 0.1;
  std::uint64_t seed = 13;

  int ffw_width() const { return 4 * d; }
  int joint_len() const { return k_cap + m_cap + n_cap + t_cap; }

  // Throws naming the offending key.
  void validate() const;
};

// key=value per line; '#' starts a comment line; unknown keys rejected.
// lr_decay_steps is comma-separated. Doubles round-trip exactly.
ModelConfig config_from_string(const std::string& text);
std::string config_to_string(const ModelConfig& config);
ModelConfig load_config(const std::string& path);
void save_config(const ModelConfig& config, const std::string& path);

}  // namespace tag
