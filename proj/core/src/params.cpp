#include "tag/params.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tag {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'G', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

}  // namespace

Tensor& ParamRegistry::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw std::runtime_error("duplicate parameter name: " + name);
  if (!t.requires_grad()) throw std::runtime_error("parameter must require grad: " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(t));
  return entries_.back().second;
}

Tensor& ParamRegistry::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Tensor& ParamRegistry::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
  return entries_[it->second].second;
}

bool ParamRegistry::contains(const std::string& name) const { return index_.count(name) > 0; }

std::int64_t ParamRegistry::total_numel() const {
  std::int64_t n = 0;
  for (const auto& [_, t] : entries_) n += t.numel();
  return n;
}

void ParamRegistry::zero_all_grads() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

void ParamRegistry::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, entries_.size());
  for (const auto& [name, t] : entries_) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& shape = t.shape();
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) write_pod<std::int64_t>(out, d);
    auto data = t.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

void ParamRegistry::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  auto count = read_pod<std::uint64_t>(in);
  if (count != entries_.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(count) + " parameters, registry has " +
                             std::to_string(entries_.size()));
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto ndim = read_pod<std::uint32_t>(in);
    Shape shape(ndim);
    for (auto& d : shape) d = read_pod<std::int64_t>(in);
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("checkpoint parameter not in registry: " + name);
    Tensor& t = entries_[it->second].second;
    if (t.shape() != shape)
      throw std::runtime_error("checkpoint shape mismatch for " + name + ": file " + shape_str(shape) +
                               " vs registry " + shape_str(t.shape()));
    auto dst = t.mutable_data();
    in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated while reading " + name);
  }
}

Tensor init_normal(Shape shape, double stddev, Rng& rng) {
  std::vector<double> data(static_cast<size_t>(shape_numel(shape)));
  for (auto& x : data) x = stddev * rng.normal();
  return Tensor::from_data(std::move(shape), std::move(data), /*requires_grad=*/true);
}

}  // namespace tag
