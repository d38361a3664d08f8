#include "tag/manifest.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

#include "tag/hash.hpp"

namespace tag {

std::pair<std::string, std::string> hash_artifact(const std::string& path) {
  return {path, sha256_file_hex(path)};
}

void write_run_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_text;
  j["seed"] = manifest.seed;
  j["duration_seconds"] = manifest.duration_seconds;
  auto to_object = [](const std::vector<std::pair<std::string, std::string>>& pairs) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : pairs) obj[k] = v;
    return obj;
  };
  j["inputs"] = to_object(manifest.inputs);
  j["outputs"] = to_object(manifest.outputs);
  j["details"] = to_object(manifest.details);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run manifest " + path);
  out << j.dump(2) << '\n';
}

}  // namespace tag
