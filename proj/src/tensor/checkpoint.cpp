#include "sapgan/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sapgan/errors.hpp"

namespace sapgan {
namespace {

constexpr char kMagic[4] = {'S', 'A', 'P', 'G'};

void write_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated checkpoint: " + path.string());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void Checkpoint::put(const std::string& name, Shape shape, std::vector<float> values) {
  if (numel(shape) != values.size())
    throw ShapeError("checkpoint entry '" + name + "': shape " + to_string(shape) + " vs " +
                     std::to_string(values.size()) + " values");
  if (!entries_.count(name)) order_.push_back(name);
  entries_[name] = CheckpointEntry{std::move(shape), std::move(values)};
}

const CheckpointEntry& Checkpoint::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw IoError("checkpoint has no entry '" + name + "'");
  return it->second;
}

std::vector<std::string> Checkpoint::names() const { return order_; }

template <class T>
void Checkpoint::put_state(const nn::StateList<T>& state) {
  for (const auto& s : state) put<T>(s.name, s.shape, std::span<const T>(s.values));
}

template <class T>
void Checkpoint::load_state(const nn::StateList<T>& state) const {
  for (const auto& s : state) {
    const auto& e = get(s.name);
    if (e.shape != s.shape)
      throw ShapeError("checkpoint entry '" + s.name + "': expected " + to_string(s.shape) + ", found " +
                       to_string(e.shape));
    std::copy(e.values.begin(), e.values.end(), s.values.begin());
  }
}

template <class T>
void Checkpoint::put_optimizer(const Adam<T>& opt) {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const auto& p = opt.params()[i];
    const auto& st = opt.states()[i];
    put<T>(p.name + ".adam.m", p.tensor.shape(), std::span<const T>(st.m));
    put<T>(p.name + ".adam.v", p.tensor.shape(), std::span<const T>(st.v));
    put(p.name + ".adam.t", {1}, {static_cast<float>(st.t)});
  }
}

template <class T>
void Checkpoint::load_optimizer(Adam<T>& opt) const {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const auto& p = opt.params()[i];
    auto& st = opt.states()[i];
    const auto& m = get(p.name + ".adam.m");
    const auto& v = get(p.name + ".adam.v");
    if (m.shape != p.tensor.shape() || v.shape != p.tensor.shape())
      throw ShapeError("optimizer state for '" + p.name + "': expected " + to_string(p.tensor.shape()) + ", found " +
                       to_string(m.shape));
    st.m.assign(m.values.begin(), m.values.end());
    st.v.assign(v.values.begin(), v.values.end());
    st.t = static_cast<std::int64_t>(get(p.name + ".adam.t").values.at(0));
  }
}

void Checkpoint::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path.string());
  os.write(kMagic, 4);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(order_.size()));
  for (const auto& name : order_) {
    const auto& e = entries_.at(name);
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) write_u32(os, static_cast<std::uint32_t>(d));
    for (float f : e.values) write_u32(os, std::bit_cast<std::uint32_t>(f));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a SAPG checkpoint: " + path.string());
  const auto version = read_u32(is, path);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path.string());
  const auto count = read_u32(is, path);
  Checkpoint ckpt;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = read_u32(is, path);
    if (name_len > (1u << 16)) throw IoError("corrupt checkpoint entry name: " + path.string());
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("truncated checkpoint: " + path.string());
    const auto rank = read_u32(is, path);
    if (rank > 8) throw IoError("corrupt checkpoint rank for '" + name + "': " + path.string());
    Shape shape(rank);
    for (auto& d : shape) d = read_u32(is, path);
    std::vector<float> values(numel(shape));
    for (auto& v : values) v = std::bit_cast<float>(read_u32(is, path));
    ckpt.put(name, std::move(shape), std::move(values));
  }
  return ckpt;
}

template void Checkpoint::put_state<float>(const nn::StateList<float>&);
template void Checkpoint::put_state<double>(const nn::StateList<double>&);
template void Checkpoint::load_state<float>(const nn::StateList<float>&) const;
template void Checkpoint::load_state<double>(const nn::StateList<double>&) const;
template void Checkpoint::put_optimizer<float>(const Adam<float>&);
template void Checkpoint::load_optimizer<float>(Adam<float>&) const;

}  // namespace sapgan
