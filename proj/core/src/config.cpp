#include "tag/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tag {

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::runtime_error("config key '" + key + "': " + why);
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_key(key, "expected integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_key(key, "expected number, got '" + value + "'");
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ModelConfig::validate() const {
  if (d < 1) throw std::runtime_error("config key 'd': must be >= 1");
  if (heads < 1) throw std::runtime_error("config key 'heads': must be >= 1");
  if (d % heads != 0) throw std::runtime_error("config key 'd': must be divisible by heads");
  if (layers < 1) throw std::runtime_error("config key 'layers': must be >= 1");
  if (k_cap < 1) throw std::runtime_error("config key 'k_cap': must be >= 1");
  if (m_cap < 1) throw std::runtime_error("config key 'm_cap': must be >= 1");
  if (n_cap < 1) throw std::runtime_error("config key 'n_cap': must be >= 1");
  if (t_cap < 1) throw std::runtime_error("config key 't_cap': must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::runtime_error("config key 'dropout': must be in [0, 1)");
  if (!(lr > 0.0)) throw std::runtime_error("config key 'lr': must be > 0");
  if (batch_size < 1) throw std::runtime_error("config key 'batch_size': must be >= 1");
  if (max_iters < 1) throw std::runtime_error("config key 'max_iters': must be >= 1");
  if (!(lr_decay_factor > 0.0)) throw std::runtime_error("config key 'lr_decay_factor': must be > 0");
  for (int s : lr_decay_steps)
    if (s < 0) throw std::runtime_error("config key 'lr_decay_steps': steps must be >= 0");
}

ModelConfig config_from_string(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "d") c.d = static_cast<int>(parse_int(key, value));
    else if (key == "layers") c.layers = static_cast<int>(parse_int(key, value));
    else if (key == "heads") c.heads = static_cast<int>(parse_int(key, value));
    else if (key == "k_cap") c.k_cap = static_cast<int>(parse_int(key, value));
    else if (key == "m_cap") c.m_cap = static_cast<int>(parse_int(key, value));
    else if (key == "n_cap") c.n_cap = static_cast<int>(parse_int(key, value));
    else if (key == "t_cap") c.t_cap = static_cast<int>(parse_int(key, value));
    else if (key == "dropout") c.dropout = parse_double(key, value);
    else if (key == "lr") c.lr = parse_double(key, value);
    else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "max_iters") c.max_iters = static_cast<int>(parse_int(key, value));
    else if (key == "lr_decay_factor") c.lr_decay_factor = parse_double(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "lr_decay_steps") {
      c.lr_decay_steps.clear();
      std::string item;
      std::istringstream items(value);
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!item.empty()) c.lr_decay_steps.push_back(static_cast<int>(parse_int(key, item)));
      }
    } else {
      throw std::runtime_error("config key '" + key + "': unknown key");
    }
  }
  c.validate();
  return c;
}

std::string config_to_string(const ModelConfig& c) {
  std::ostringstream out;
  out << "d=" << c.d << '\n';
  out << "layers=" << c.layers << '\n';
  out << "heads=" << c.heads << '\n';
  out << "k_cap=" << c.k_cap << '\n';
  out << "m_cap=" << c.m_cap << '\n';
  out << "n_cap=" << c.n_cap << '\n';
  out << "t_cap=" << c.t_cap << '\n';
  out << "dropout=" << format_double(c.dropout) << '\n';
  out << "lr=" << format_double(c.lr) << '\n';
  out << "batch_size=" << c.batch_size << '\n';
  out << "max_iters=" << c.max_iters << '\n';
  out << "lr_decay_steps=";
  for (size_t i = 0; i < c.lr_decay_steps.size(); ++i) {
    if (i) out << ',';
    out << c.lr_decay_steps[i];
  }
  out << '\n';
  out << "lr_decay_factor=" << format_double(c.lr_decay_factor) << '\n';
  out << "seed=" << c.seed << '\n';
  return out.str();
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_string(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_config(const ModelConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path);
  out << config_to_string(config);
}

}  // namespace tag
