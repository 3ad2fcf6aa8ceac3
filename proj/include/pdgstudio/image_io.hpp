#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pdgstudio/raster.hpp"

namespace pdg {

/// Decoded PNG with its native sample depth. Samples are stored widened to 16 bits.
struct PngRaster {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

PngRaster read_png(const std::filesystem::path& path);
PngRaster decode_png(const std::vector<std::uint8_t>& bytes);

/// 8-bit RGB; gray inputs are replicated, alpha is dropped.
Image read_rgb_png(const std::filesystem::path& path);
/// 8-bit single channel 0/255 (any value > 127 counts as set) to a 0/1 mask.
Mask read_mask_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_mask_png(const Mask& mask);
void write_png(const std::filesystem::path& path, const Image& image);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);
/// 16-bit grayscale, used for quantized depth.
void write_gray16_png(const std::filesystem::path& path, int rows, int cols, const std::vector<std::uint16_t>& samples);

/// Portable float map ("Pf", little-endian, bottom row first).
DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pdg
