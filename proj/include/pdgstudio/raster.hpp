#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdgstudio/error.hpp"

namespace pdg {

/// Integer pixel coordinate; origin top-left, pixel centers at integers.
struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Dense row-major H x W x C raster.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int rows, int cols, int channels = 1, T fill = T{})
      : rows_(rows), cols_(cols), channels_(channels) {
    if (rows < 0 || cols < 0 || channels < 1) throw ArgumentError("raster dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(rows) * cols * channels, fill);
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < rows_ && col < cols_;
  }
  bool same_shape(const Raster& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_;
  }

  std::size_t index(int row, int col, int ch = 0) const noexcept {
    return (static_cast<std::size_t>(row) * cols_ + col) * channels_ + ch;
  }
  T& at(int row, int col, int ch = 0) noexcept { return data_[index(row, col, ch)]; }
  const T& at(int row, int col, int ch = 0) const noexcept { return data_[index(row, col, ch)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

/// 8-bit RGB image.
using Image = Raster<std::uint8_t>;
/// Binary mask stored as 0/1 bytes.
using Mask = Raster<std::uint8_t>;
/// Metric depth; 0 or NaN marks an invalid sample.
using DepthMap = Raster<float>;

inline Image make_image(int rows, int cols) { return Image(rows, cols, 3); }
inline Mask make_mask(int rows, int cols) { return Mask(rows, cols, 1); }

inline Rgb pixel_rgb(const Image& image, int row, int col) {
  return {image.at(row, col, 0), image.at(row, col, 1), image.at(row, col, 2)};
}

inline std::size_t count_set(const Mask& mask) {
  std::size_t n = 0;
  for (auto v : mask.data()) n += v != 0;
  return n;
}

}  // namespace pdg
