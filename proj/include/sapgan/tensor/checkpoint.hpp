#pragma once

// Named-tensor container persisted in the "SAPG" binary format:
//
//   "SAPG" | u32 version | u32 entry count |
//   per entry: u32 name length, UTF-8 name, u32 rank, u32 dims[rank],
//              little-endian f32 values[prod(dims)]
//
// Optimizer state rides along as extra entries "<param>.adam.m",
// "<param>.adam.v" and "<param>.adam.t".

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sapgan/tensor/adam.hpp"
#include "sapgan/tensor/nn.hpp"

namespace sapgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  Shape shape;
  std::vector<float> values;
};

class Checkpoint {
 public:
  void put(const std::string& name, Shape shape, std::vector<float> values);
  template <class T>
  void put(const std::string& name, const Shape& shape, std::span<const T> values) {
    put(name, shape, std::vector<float>(values.begin(), values.end()));
  }

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  /// Throws IoError when the entry is missing.
  const CheckpointEntry& get(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

  /// Writes every model state slice.
  template <class T>
  void put_state(const nn::StateList<T>& state);
  /// Copies entries into model state; throws ShapeError on expected-vs-found mismatch.
  template <class T>
  void load_state(const nn::StateList<T>& state) const;

  template <class T>
  void put_optimizer(const Adam<T>& opt);
  template <class T>
  void load_optimizer(Adam<T>& opt) const;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, CheckpointEntry> entries_;
  std::vector<std::string> order_;
};

}  // namespace sapgan
