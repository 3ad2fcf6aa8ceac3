#include "pdgstudio/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace pdg {

namespace {

void require_same(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": images differ in size");
}

}  // namespace

OptflowResult optflow_score(const std::vector<Image>& video, const std::vector<FlowField>& reference, double tau,
                            const BlockMatchParams& params) {
  if (video.size() < 2) throw ArgumentError("optflow_score needs at least two frames");
  if (reference.size() != video.size() - 1)
    throw ShapeError("optflow_score: " + std::to_string(video.size()) + " frames but " +
                     std::to_string(reference.size()) + " reference flows");
  OptflowResult result;
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < video.size(); ++t) {
    const FlowField& ref = reference[t];
    if (ref.rows != video[t].rows() || ref.cols != video[t].cols())
      throw ShapeError("optflow_score: reference flow size differs from the video");
    const FlowField est = estimate_flow(video[t], video[t + 1], params);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.valid.size(); ++i) {
      if (!ref.valid[i]) continue;
      const double rn = std::hypot(ref.dcol[i], ref.drow[i]);
      if (rn < tau) continue;
      const double en = std::hypot(est.dcol[i], est.drow[i]);
      // A zero estimate has no direction and contributes 0.
      if (en > 0.0) sum += (est.dcol[i] * ref.dcol[i] + est.drow[i] * ref.drow[i]) / (en * rn);
      ++n;
    }
    if (n == 0) continue;
    total += sum / static_cast<double>(n);
    ++result.pairs_used;
    result.pixels_used += n;
  }
  if (result.pairs_used == 0)
    throw MetricError("optflow score undefined: no reference flow reaches tau = " + std::to_string(tau) + " px");
  result.score = total / static_cast<double>(result.pairs_used);
  return result;
}

double idiff(const Image& a, const Image& b) {
  require_same(a, b, "idiff");
  Mask all = make_mask(a.rows(), a.cols());
  for (auto& v : all.data()) v = 1;
  return idiff_masked(a, b, all).value;
}

MaskedValue idiff_masked(const Image& a, const Image& b, const Mask& mask) {
  require_same(a, b, "idiff_m");
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) throw ShapeError("idiff_m: mask differs in size");
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      double sq = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = static_cast<double>(a.at(r, c, ch)) - b.at(r, c, ch);
        sq += d * d;
      }
      sum += std::sqrt(sq);
      ++n;
    }
  if (n == 0) return {0.0, true};
  return {sum / static_cast<double>(n), false};
}

double psnr(const Image& a, const Image& b) {
  require_same(a, b, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  if (se == 0.0 || a.data().empty()) return kPsnrCap;
  const double mse = se / static_cast<double>(a.data().size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  require_same(a, b, "ssim");
  constexpr int kWin = 8;
  if (a.rows() < kWin || a.cols() < kWin) throw ArgumentError("ssim needs images of at least 8x8");
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  const int rows = a.rows(), cols = a.cols(), channels = a.channels();
  // Summed-area tables of x, y, x^2, y^2, xy per channel.
  const std::size_t stride = static_cast<std::size_t>(cols) + 1;
  std::vector<double> sx(stride * (rows + 1)), sy(sx.size()), sxx(sx.size()), syy(sx.size()), sxy(sx.size());
  double total = 0.0;
  std::size_t windows = 0;
  for (int ch = 0; ch < channels; ++ch) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double x = a.at(r, c, ch), y = b.at(r, c, ch);
        const std::size_t i = (r + 1) * stride + (c + 1), up = r * stride + (c + 1), lf = (r + 1) * stride + c,
                          ul = r * stride + c;
        sx[i] = x + sx[up] + sx[lf] - sx[ul];
        sy[i] = y + sy[up] + sy[lf] - sy[ul];
        sxx[i] = x * x + sxx[up] + sxx[lf] - sxx[ul];
        syy[i] = y * y + syy[up] + syy[lf] - syy[ul];
        sxy[i] = x * y + sxy[up] + sxy[lf] - sxy[ul];
      }
    auto box = [&](const std::vector<double>& s, int r, int c) {
      return s[(r + kWin) * stride + c + kWin] - s[r * stride + c + kWin] - s[(r + kWin) * stride + c] + s[r * stride + c];
    };
    constexpr double n = kWin * kWin;
    for (int r = 0; r + kWin <= rows; ++r)
      for (int c = 0; c + kWin <= cols; ++c) {
        const double mx = box(sx, r, c) / n, my = box(sy, r, c) / n;
        const double vx = std::max(0.0, box(sxx, r, c) / n - mx * mx);
        const double vy = std::max(0.0, box(syy, r, c) / n - my * my);
        const double cov = box(sxy, r, c) / n - mx * my;
        total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
  }
  return total / static_cast<double>(windows);
}

nlohmann::json to_json(const MetricReport& r) {
  return {{"sample_id", r.sample_id},
          {"frames", r.frames},
          {"rows", r.rows},
          {"cols", r.cols},
          {"tau", r.tau},
          {"optflow", r.optflow},
          {"idiff", r.idiff},
          {"idiff_m", r.idiff_m},
          {"empty_mask", r.empty_mask},
          {"psnr", r.psnr},
          {"ssim", r.ssim}};
}

std::string metrics_csv(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "sample_id,optflow,idiff,idiff_m,psnr,ssim\n";
  double sums[5] = {0, 0, 0, 0, 0};
  for (const auto& r : reports) {
    out << r.sample_id << "," << r.optflow << "," << r.idiff << "," << r.idiff_m << "," << r.psnr << "," << r.ssim << "\n";
    const double v[5] = {r.optflow, r.idiff, r.idiff_m, r.psnr, r.ssim};
    for (int k = 0; k < 5; ++k) sums[k] += v[k];
  }
  if (!reports.empty()) {
    const double n = static_cast<double>(reports.size());
    out << "mean," << sums[0] / n << "," << sums[1] / n << "," << sums[2] / n << "," << sums[3] / n << "," << sums[4] / n
        << "\n";
  }
  return out.str();
}

}  // namespace pdg
