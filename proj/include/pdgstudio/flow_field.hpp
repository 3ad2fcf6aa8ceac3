#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pdg {

/// Per-pixel image-plane displacement (dcol, drow) with a validity mask.
struct FlowField {
  int rows = 0;
  int cols = 0;
  std::vector<double> dcol;
  std::vector<double> drow;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int r, int c)
      : rows(r),
        cols(c),
        dcol(static_cast<std::size_t>(r) * c, 0.0),
        drow(static_cast<std::size_t>(r) * c, 0.0),
        valid(static_cast<std::size_t>(r) * c, 0) {}

  std::size_t index(int r, int c) const noexcept { return static_cast<std::size_t>(r) * cols + c; }
};

}  // namespace pdg
