#include "pdnmt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pdnmt/corpus.hpp"
#include "pdnmt/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace pdnmt {

namespace {

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& data, size_t& off, const std::string& path) {
  if (off + sizeof(T) > data.size()) throw RuntimeError("checkpoint " + path + " is truncated");
  T value;
  std::memcpy(&value, data.data() + off, sizeof(T));
  off += sizeof(T);
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterStore& store, uint64_t config_digest) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<uint32_t>(out, kCheckpointVersion);
  put<uint64_t>(out, config_digest);
  put<uint32_t>(out, static_cast<uint32_t>(store.size()));
  for (const auto& name : store.names()) {
    const Tensor& t = store.at(name);
    put<uint16_t>(out, static_cast<uint16_t>(name.size()));
    out.append(name);
    put<uint8_t>(out, static_cast<uint8_t>(store.partition_of(name)));
    put<uint8_t>(out, static_cast<uint8_t>(t.rank()));
    for (int d : t.shape) put<uint32_t>(out, static_cast<uint32_t>(d));
    for (double v : t.values) put<float>(out, static_cast<float>(v));
  }
  write_file_atomic(path, out);
}

ParameterStore load_checkpoint(const std::string& path, uint64_t expected_digest) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read checkpoint " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  size_t off = 0;
  if (data.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw RuntimeError("checkpoint " + path + " has a bad magic header");
  off += sizeof(kCheckpointMagic);
  const auto version = get<uint32_t>(data, off, path);
  if (version != kCheckpointVersion)
    throw RuntimeError(strfmt("checkpoint %s: unsupported version %u", path.c_str(), version));
  const auto digest = get<uint64_t>(data, off, path);
  if (expected_digest != 0 && digest != expected_digest)
    throw RuntimeError("checkpoint " + path + " was written for a different model configuration");

  ParameterStore store;
  const auto count = get<uint32_t>(data, off, path);
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<uint16_t>(data, off, path);
    if (off + name_len > data.size()) throw RuntimeError("checkpoint " + path + " is truncated");
    std::string name(data.data() + off, name_len);
    off += name_len;
    const auto partition = static_cast<Partition>(get<uint8_t>(data, off, path));
    const auto rank = get<uint8_t>(data, off, path);
    std::vector<int> shape;
    for (int d = 0; d < rank; ++d) shape.push_back(static_cast<int>(get<uint32_t>(data, off, path)));
    Tensor t = Tensor::zeros(shape);
    for (double& v : t.values) v = static_cast<double>(get<float>(data, off, path));
    store.put(name, std::move(t), partition);
  }
  return store;
}

uint64_t checkpoint_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read checkpoint " + path);
  char header[sizeof(kCheckpointMagic) + sizeof(uint32_t) + sizeof(uint64_t)];
  if (!f.read(header, sizeof(header))) throw RuntimeError("checkpoint " + path + " is truncated");
  if (std::memcmp(header, kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw RuntimeError("checkpoint " + path + " has a bad magic header");
  uint64_t digest;
  std::memcpy(&digest, header + sizeof(kCheckpointMagic) + sizeof(uint32_t), sizeof(digest));
  return digest;
}

}  // namespace pdnmt
