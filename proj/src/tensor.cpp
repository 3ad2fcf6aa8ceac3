#include "pdgstudio/tensor.hpp"

#include <bit>
#include <cstring>

#include "pdgstudio/image_io.hpp"

namespace pdg {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'G', 'T'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor4f& tensor) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.reserve(kHeaderBytes + tensor.data.size() * 4);
  for (auto d : tensor.dims) put_u32(out, d);
  for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor4f decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IoError("not a PDGT tensor");
  Tensor4f t;
  std::size_t count = 1;
  for (int i = 0; i < 4; ++i) {
    t.dims[i] = get_u32(bytes.data() + 4 + 4 * i);
    count *= t.dims[i];
  }
  if (bytes.size() != kHeaderBytes + count * 4) throw IoError("PDGT payload size does not match header");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + kHeaderBytes + 4 * i));
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor4f& tensor) {
  write_file_bytes(path, encode_tensor(tensor));
}

Tensor4f read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file_bytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

bool bit_identical(const Tensor4f& a, const Tensor4f& b) {
  return a.dims == b.dims && a.data.size() == b.data.size() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace pdg
