#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pdgstudio/error.hpp"

namespace pdg {

/// Dense 4-D float tensor, row-major over (frames, rows, cols, channels).
struct Tensor4f {
  std::array<std::uint32_t, 4> dims{};
  std::vector<float> data;

  Tensor4f() = default;
  Tensor4f(std::uint32_t frames, std::uint32_t rows, std::uint32_t cols, std::uint32_t channels, float fill = 0.0f)
      : dims{frames, rows, cols, channels},
        data(static_cast<std::size_t>(frames) * rows * cols * channels, fill) {}

  std::uint32_t frames() const noexcept { return dims[0]; }
  std::uint32_t rows() const noexcept { return dims[1]; }
  std::uint32_t cols() const noexcept { return dims[2]; }
  std::uint32_t channels() const noexcept { return dims[3]; }

  std::size_t index(std::size_t f, std::size_t r, std::size_t c, std::size_t ch = 0) const noexcept {
    return ((f * dims[1] + r) * dims[2] + c) * dims[3] + ch;
  }
  float& at(std::size_t f, std::size_t r, std::size_t c, std::size_t ch = 0) noexcept { return data[index(f, r, c, ch)]; }
  float at(std::size_t f, std::size_t r, std::size_t c, std::size_t ch = 0) const noexcept {
    return data[index(f, r, c, ch)];
  }

  bool operator==(const Tensor4f&) const = default;
};

/// Raw tensor file: magic "PDGT", four little-endian u32 dims, then float32
/// little-endian samples in row-major order.
std::vector<std::uint8_t> encode_tensor(const Tensor4f& tensor);
Tensor4f decode_tensor(const std::vector<std::uint8_t>& bytes);
void write_tensor(const std::filesystem::path& path, const Tensor4f& tensor);
Tensor4f read_tensor(const std::filesystem::path& path);

/// Bitwise comparison; distinguishes NaN payloads and signed zeros.
bool bit_identical(const Tensor4f& a, const Tensor4f& b);

}  // namespace pdg
