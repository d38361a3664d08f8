#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tag {

// Per-command provenance record. Artifact hashes make reruns
// comparable: identical inputs and seed must reproduce identical output
// hashes (duration aside).
struct RunManifest {
  std::string command;
  std::string config_text;  // key=value snapshot, empty when no config applies
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // path -> sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // path -> sha256
  std::vector<std::pair<std::string, std::string>> details;  // free-form key -> value
  double duration_seconds = 0.0;
};

// SHA-256 of the file at `path`, recorded alongside it.
std::pair<std::string, std::string> hash_artifact(const std::string& path);

void write_run_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace tag
