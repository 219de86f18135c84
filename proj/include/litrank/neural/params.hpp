#pragma once
// Named parameters, deterministic initialization, and the checkpoint container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "litrank/binary_io.hpp"
#include "litrank/common.hpp"
#include "litrank/neural/tensor.hpp"

namespace litrank::nn {

// mt19937_64 stream keyed by (seed, name). Streams never share state, so
// adding a parameter does not shift the values drawn for any other.
class NamedRng {
 public:
  NamedRng(std::uint64_t seed, std::string_view name)
      : gen_(seed * 0x9e3779b97f4a7c15ULL ^ Fnv1a{}.update(name).digest()) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; both variates of a pair are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class Init {
  zeros,
  fan_in_uniform,  // U(-sqrt(3/fan_in), sqrt(3/fan_in)), variance 1/fan_in; fan_in = rows
  embedding,       // N(0, 0.02^2)
  ones,
};

template <class T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  bool trainable = true;
};

template <class T>
class ParameterSet {
 public:
  explicit ParameterSet(std::uint64_t seed = 0) : seed_(seed) {}

  Tensor<T> add(const std::string& name, Shape shape, Init init, bool trainable = true) {
    if (index_.contains(name)) throw InvariantError("duplicate parameter name " + name);
    const auto count = numel(shape);
    std::vector<T> values(count, T(0));
    NamedRng rng(seed_, name);
    switch (init) {
      case Init::zeros: break;
      case Init::ones: std::fill(values.begin(), values.end(), T(1)); break;
      case Init::fan_in_uniform: {
        const double fan_in = shape.empty() ? 1.0 : static_cast<double>(shape.front());
        const double bound = std::sqrt(3.0 / fan_in);
        for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
        break;
      }
      case Init::embedding:
        for (auto& v : values) v = static_cast<T>(0.02 * rng.normal());
        break;
    }
    index_.emplace(name, params_.size());
    params_.push_back({name, Tensor<T>::from(std::move(shape), std::move(values), true), trainable});
    return params_.back().tensor;
  }

  const Tensor<T>& get(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw InvariantError("unknown parameter " + name);
    return params_[it->second].tensor;
  }
  Tensor<T>& get(const std::string& name) {
    return const_cast<Tensor<T>&>(static_cast<const ParameterSet&>(*this).get(name));
  }
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::vector<Parameter<T>>& all() { return params_; }
  const std::vector<Parameter<T>>& all() const { return params_; }

  std::vector<Tensor<T>> tensors() const {
    std::vector<Tensor<T>> out;
    for (const auto& p : params_) out.push_back(p.tensor);
    return out;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<Parameter<T>> params_;
  std::map<std::string, std::size_t> index_;
};

// Checkpoint: magic, u32 version, metadata string, u32 count, then per
// parameter: name, u32 rank, u64 dims, f64 little-endian values.
inline constexpr std::string_view kCheckpointMagic{"LITCKPT\0", 8};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void save_checkpoint(const std::filesystem::path& path, const ParameterSet<T>& params, const std::string& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  binio::put_u32(out, kCheckpointVersion);
  binio::put_string(out, metadata);
  binio::put_u32(out, static_cast<std::uint32_t>(params.all().size()));
  for (const auto& p : params.all()) {
    binio::put_string(out, p.name);
    binio::put_u32(out, static_cast<std::uint32_t>(p.tensor.shape().size()));
    for (const auto d : p.tensor.shape()) binio::put_u64(out, d);
    for (const auto v : p.tensor.data()) binio::put_f64(out, static_cast<double>(v));
  }
  if (!out) throw InputError("write failed: " + path.string());
}

struct CheckpointEntry {
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::string metadata;
  std::map<std::string, CheckpointEntry> entries;
};

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  binio::expect_magic(in, kCheckpointMagic, path.string());
  if (const auto v = binio::get_u32(in); v != kCheckpointVersion)
    throw InputError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  Checkpoint ck;
  ck.metadata = binio::get_string(in);
  const auto count = binio::get_u32(in);
  for (std::uint32_t k = 0; k < count; ++k) {
    auto name = binio::get_string(in);
    CheckpointEntry e;
    const auto rank = binio::get_u32(in);
    if (rank > 8) throw InputError(path.string() + ": bad rank for " + name);
    for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(binio::get_u64(in));
    const auto n = numel(e.shape);
    if (n > (std::size_t{1} << 32)) throw InputError(path.string() + ": tensor too large");
    e.values.resize(n);
    for (auto& v : e.values) v = binio::get_f64(in);
    ck.entries.emplace(std::move(name), std::move(e));
  }
  return ck;
}

// Copies checkpoint values into matching parameters; every parameter must be present.
template <class T>
void load_checkpoint_into(const Checkpoint& ck, ParameterSet<T>& params) {
  for (auto& p : params.all()) {
    const auto it = ck.entries.find(p.name);
    if (it == ck.entries.end()) throw InputError("checkpoint lacks parameter " + p.name);
    if (it->second.shape != p.tensor.shape())
      throw InputError("checkpoint shape mismatch for " + p.name + ": " + shape_str(it->second.shape) + " vs " +
                       shape_str(p.tensor.shape()));
    auto dst = p.tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(it->second.values[i]);
  }
}

}  // namespace litrank::nn
