#include "pdgstudio/latent.hpp"

#include <random>
#include <sstream>

namespace pdg {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Source: return "source";
    case Provenance::Edit: return "edit";
    case Provenance::Composite: return "composite";
  }
  return "unknown";
}

std::string_view to_string(Conditioning c) { return c == Conditioning::UseComposite ? "composite" : "source"; }

void check_latent_divisible(std::uint32_t frames, std::uint32_t rows, std::uint32_t cols) {
  if (frames < 1 || (frames - 1) % kTemporalGroup != 0 || rows % kSpatialStride != 0 || cols % kSpatialStride != 0 ||
      rows == 0 || cols == 0) {
    std::ostringstream msg;
    msg << "video of " << frames << " frames at " << cols << "x" << rows
        << " is not divisible into latents (need 1 + 4k frames, sides multiple of 8)";
    throw ArgumentError(msg.str());
  }
}

std::array<std::uint32_t, 4> latent_shape(std::uint32_t frames, std::uint32_t rows, std::uint32_t cols,
                                          std::uint32_t channels) {
  check_latent_divisible(frames, rows, cols);
  return {1 + (frames - 1) / kTemporalGroup, rows / kSpatialStride, cols / kSpatialStride, channels};
}

namespace {

// Video frames feeding latent frame k.
std::pair<std::uint32_t, std::uint32_t> frame_group(std::uint32_t k) {
  if (k == 0) return {0, 0};
  return {kTemporalGroup * k - (kTemporalGroup - 1), kTemporalGroup * k};
}

void require_same(const Tensor4f& a, const Tensor4f& b, const char* what) {
  if (a.dims[0] != b.dims[0] || a.dims[1] != b.dims[1] || a.dims[2] != b.dims[2])
    throw ShapeError(std::string(what) + ": latent shapes differ");
}

}  // namespace

Tensor4f build_pseudo_video(const Image& image, int frames) {
  if (frames < 1) throw ArgumentError("pseudo video needs T >= 1");
  Tensor4f video(static_cast<std::uint32_t>(frames) + 1, image.rows(), image.cols(), 3, 0.0f);
  for (std::size_t i = 0; i < image.data().size(); ++i) video.data[i] = image.data()[i];
  return video;
}

Tensor4f build_edit_video(const Image& edited, int frames, int rows, int cols) {
  if (frames < 1) throw ArgumentError("edit video needs T >= 1");
  if (edited.rows() != rows || edited.cols() != cols || edited.channels() != 3) {
    std::ostringstream msg;
    msg << "edited frame is " << edited.cols() << "x" << edited.rows() << ", expected " << cols << "x" << rows;
    throw ShapeError(msg.str());
  }
  Tensor4f video(static_cast<std::uint32_t>(frames) + 1, rows, cols, 3);
  const std::size_t n = edited.data().size();
  for (std::uint32_t f = 0; f < video.frames(); ++f)
    for (std::size_t i = 0; i < n; ++i) video.data[f * n + i] = edited.data()[i];
  return video;
}

LatentMask downsample_mask(const DisocclusionMask& mask) {
  const auto shape = latent_shape(mask.frames, mask.rows, mask.cols, 1);
  LatentMask out{Tensor4f(shape[0], shape[1], shape[2], 1)};
  for (std::uint32_t k = 0; k < shape[0]; ++k) {
    const auto [f0, f1] = frame_group(k);
    for (std::uint32_t f = f0; f <= f1; ++f)
      for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
          if (mask.at(static_cast<int>(f), r, c)) out.values.at(k, r / kSpatialStride, c / kSpatialStride) = 1.0f;
  }
  return out;
}

LatentTensor composite(const LatentTensor& source, const LatentTensor& edit, const LatentMask& mask) {
  require_same(source.values, edit.values, "composite");
  require_same(source.values, mask.values, "composite");
  if (source.values.channels() != edit.values.channels() || mask.values.channels() != 1)
    throw ShapeError("composite: channel counts differ");
  LatentTensor out{source.values, Provenance::Composite};
  const std::size_t channels = source.values.channels();
  for (std::size_t cell = 0; cell < mask.values.data.size(); ++cell) {
    const float m = mask.values.data[cell];
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const std::size_t i = cell * channels + ch;
      // Binary cells select exactly; fractional cells blend.
      if (m == 1.0f)
        out.values.data[i] = edit.values.data[i];
      else if (m != 0.0f)
        out.values.data[i] = m * edit.values.data[i] + (1.0f - m) * source.values.data[i];
    }
  }
  return out;
}

LatentTensor apply_zero_rule(const LatentTensor& latent, const LatentMask& mask) {
  require_same(latent.values, mask.values, "apply_zero_rule");
  LatentTensor out = latent;
  const std::size_t channels = latent.values.channels();
  const std::size_t per_frame = static_cast<std::size_t>(mask.values.rows()) * mask.values.cols();
  for (std::size_t cell = per_frame; cell < mask.values.data.size(); ++cell)
    if (mask.values.data[cell] == 0.0f)
      for (std::size_t ch = 0; ch < channels; ++ch) out.values.data[cell * channels + ch] = 0.0f;
  return out;
}

ScheduleDecision schedule_conditioning(int step, int total_steps, int replace_steps) {
  if (total_steps < 1) throw ArgumentError("schedule needs N >= 1");
  if (replace_steps < 0 || replace_steps > total_steps)
    throw ArgumentError("schedule needs 0 <= M <= N, got M = " + std::to_string(replace_steps));
  if (step < 1 || step > total_steps)
    throw ArgumentError("step " + std::to_string(step) + " outside 1.." + std::to_string(total_steps));
  return {step, total_steps, replace_steps,
          step > total_steps - replace_steps ? Conditioning::UseComposite : Conditioning::UseSource};
}

const std::array<std::array<double, 3>, kLatentChannels>& ReferenceEncoder::lift_matrix() {
  static const auto weights = [] {
    std::array<std::array<double, 3>, kLatentChannels> w{};
    std::mt19937 rng(20240607u);
    for (auto& row : w)
      for (auto& v : row) v = static_cast<double>(rng()) / 4294967296.0 * 2.0 - 1.0;
    return w;
  }();
  return weights;
}

LatentTensor ReferenceEncoder::encode(const Tensor4f& video) const {
  if (video.channels() != 3) throw ShapeError("encoder expects RGB video");
  const auto shape = latent_shape(video.frames(), video.rows(), video.cols());
  const auto& lift = lift_matrix();
  LatentTensor out{Tensor4f(shape[0], shape[1], shape[2], shape[3]), Provenance::Source};
  for (std::uint32_t k = 0; k < shape[0]; ++k) {
    const auto [f0, f1] = frame_group(k);
    const double count = static_cast<double>(f1 - f0 + 1) * kSpatialStride * kSpatialStride;
    for (std::uint32_t br = 0; br < shape[1]; ++br)
      for (std::uint32_t bc = 0; bc < shape[2]; ++bc) {
        double rgb[3] = {0.0, 0.0, 0.0};
        for (std::uint32_t f = f0; f <= f1; ++f)
          for (std::uint32_t r = br * kSpatialStride; r < (br + 1) * kSpatialStride; ++r)
            for (std::uint32_t c = bc * kSpatialStride; c < (bc + 1) * kSpatialStride; ++c)
              for (int ch = 0; ch < 3; ++ch) rgb[ch] += video.at(f, r, c, ch);
        for (double& v : rgb) v /= count * 255.0;
        for (int o = 0; o < kLatentChannels; ++o)
          out.values.at(k, br, bc, o) =
              static_cast<float>(lift[o][0] * rgb[0] + lift[o][1] * rgb[1] + lift[o][2] * rgb[2]);
      }
  }
  return out;
}

LatentTensor reference_encode(const Tensor4f& video) { return ReferenceEncoder{}.encode(video); }

}  // namespace pdg
