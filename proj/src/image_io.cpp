#include "pdgstudio/image_io.hpp"

#include <png.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pdg {

namespace {

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

[[noreturn]] void error_callback(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  *text = message;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

std::vector<std::uint8_t> encode(int rows, int cols, int color_type, int bit_depth,
                                 const std::vector<std::uint8_t>& packed_rows) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(cols) * channels * (bit_depth / 8);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + error);
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, cols, rows, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int r = 0; r < rows; ++r)
    png_write_row(png, const_cast<png_bytep>(packed_rows.data() + r * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

PngRaster decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8)) throw IoError("not a PNG stream");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{&bytes, 0};
  PngRaster out;
  std::vector<std::uint8_t> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG decode failed: " + error);
  }
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  out.rows = static_cast<int>(png_get_image_height(png, info));
  out.cols = static_cast<int>(png_get_image_width(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * out.rows);
  std::vector<png_bytep> rows(out.rows);
  for (int r = 0; r < out.rows; ++r) rows[r] = buffer.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.rows) * out.cols * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    std::memcpy(out.samples.data(), buffer.data(), count * 2);
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

PngRaster read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Image read_rgb_png(const std::filesystem::path& path) {
  PngRaster png = read_png(path);
  if (png.bit_depth != 8) throw IoError(path.string() + ": expected an 8-bit image");
  Image img = make_image(png.rows, png.cols);
  const bool gray = png.channels < 3;
  for (int r = 0; r < png.rows; ++r)
    for (int c = 0; c < png.cols; ++c) {
      const std::size_t base = (static_cast<std::size_t>(r) * png.cols + c) * png.channels;
      for (int ch = 0; ch < 3; ++ch)
        img.at(r, c, ch) = static_cast<std::uint8_t>(png.samples[base + (gray ? 0 : ch)]);
    }
  return img;
}

Mask read_mask_png(const std::filesystem::path& path) {
  PngRaster png = read_png(path);
  if (png.bit_depth != 8) throw IoError(path.string() + ": expected an 8-bit mask");
  Mask mask = make_mask(png.rows, png.cols);
  for (int r = 0; r < png.rows; ++r)
    for (int c = 0; c < png.cols; ++c)
      mask.at(r, c) = png.samples[(static_cast<std::size_t>(r) * png.cols + c) * png.channels] > 127 ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.channels() != 3) throw ShapeError("encode_png expects an RGB image");
  std::vector<std::uint8_t> packed(image.data().begin(), image.data().end());
  return encode(image.rows(), image.cols(), PNG_COLOR_TYPE_RGB, 8, packed);
}

std::vector<std::uint8_t> encode_mask_png(const Mask& mask) {
  std::vector<std::uint8_t> packed(mask.data().size());
  for (std::size_t i = 0; i < packed.size(); ++i) packed[i] = mask.data()[i] ? 255 : 0;
  return encode(mask.rows(), mask.cols(), PNG_COLOR_TYPE_GRAY, 8, packed);
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_file_bytes(path, encode_png(image));
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  write_file_bytes(path, encode_mask_png(mask));
}

void write_gray16_png(const std::filesystem::path& path, int rows, int cols,
                      const std::vector<std::uint16_t>& samples) {
  std::vector<std::uint8_t> packed(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xff);
  }
  write_file_bytes(path, encode(rows, cols, PNG_COLOR_TYPE_GRAY, 16, packed));
}

DepthMap read_pfm(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  // Header is three whitespace-terminated tokens followed by a single separator byte.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  const std::string magic = token();
  if (magic != "Pf") throw IoError(path.string() + ": expected a single-channel PFM ('Pf')");
  int cols = 0, rows = 0;
  double scale = 0.0;
  try {
    cols = std::stoi(token());
    rows = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PFM header");
  }
  ++pos;
  if (rows <= 0 || cols <= 0) throw IoError(path.string() + ": invalid PFM size");
  if (scale > 0.0) throw IoError(path.string() + ": big-endian PFM is not supported");
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() < pos + count * 4) throw IoError(path.string() + ": truncated PFM data");
  DepthMap depth(rows, cols, 1);
  for (int r = 0; r < rows; ++r) {
    const std::uint8_t* src = bytes.data() + pos + static_cast<std::size_t>(rows - 1 - r) * cols * 4;
    for (int c = 0; c < cols; ++c) {
      std::uint32_t bits = static_cast<std::uint32_t>(src[4 * c]) | (static_cast<std::uint32_t>(src[4 * c + 1]) << 8) |
                           (static_cast<std::uint32_t>(src[4 * c + 2]) << 16) |
                           (static_cast<std::uint32_t>(src[4 * c + 3]) << 24);
      depth.at(r, c) = std::bit_cast<float>(bits);
    }
  }
  return depth;
}

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  std::ostringstream header;
  header << "Pf\n" << depth.cols() << " " << depth.rows() << "\n-1.0\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  bytes.reserve(bytes.size() + depth.data().size() * 4);
  for (int r = depth.rows() - 1; r >= 0; --r)
    for (int c = 0; c < depth.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(depth.at(r, c));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  write_file_bytes(path, bytes);
}

}  // namespace pdg
