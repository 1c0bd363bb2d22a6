#include "eegraph/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "eegraph/errors.hpp"

namespace eegraph {

namespace {

constexpr char kMagic[4] = {'E', 'G', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  // x86-64 is little-endian; byte-swap is not needed here but keep the
  // serialization centralized
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamList& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_le<std::uint32_t>(os, kVersion);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t e : p.tensor.shape())
      write_le<std::uint64_t>(os, static_cast<std::uint64_t>(e));
    for (std::size_t i = 0; i < p.tensor.size(); ++i)
      write_le<double>(os, p.tensor.data()[i]);
  }
  if (!os) throw DataError("short write to checkpoint: " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a checkpoint file (bad magic): " + path);
  const auto version = read_le<std::uint32_t>(is);
  if (version != kVersion)
    throw DataError("unsupported checkpoint version " +
                    std::to_string(version) + " in " + path);
  const auto count = read_le<std::uint32_t>(is);
  std::map<std::string, Tensor> out;
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = read_le<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto rank = read_le<std::uint32_t>(is);
    Shape shape(rank);
    std::size_t total = 1;
    for (auto& e : shape) {
      e = static_cast<std::size_t>(read_le<std::uint64_t>(is));
      total *= e;
    }
    std::vector<double> values(total);
    for (auto& v : values) v = read_le<double>(is);
    if (!is) throw DataError("truncated checkpoint: " + path);
    out.emplace(name, Tensor::from_vector(std::move(shape), std::move(values)));
  }
  return out;
}

void restore_params(const ParamList& params,
                    const std::map<std::string, Tensor>& loaded) {
  for (const auto& p : params) {
    auto it = loaded.find(p.name);
    if (it == loaded.end())
      throw DataError("checkpoint is missing parameter '" + p.name + "'");
    if (it->second.shape() != p.tensor.shape())
      throw DataError("checkpoint shape mismatch for '" + p.name + "': " +
                      shape_to_string(it->second.shape()) + " vs " +
                      shape_to_string(p.tensor.shape()));
    double* dst = const_cast<Tensor&>(p.tensor).data();
    std::memcpy(dst, it->second.data(), p.tensor.size() * sizeof(double));
  }
}

}  // namespace eegraph
