#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pdgstudio/metrics.hpp"

namespace pdg {

namespace {

struct Gray {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  double clamped(int r, int c) const {
    r = std::clamp(r, 0, rows - 1);
    c = std::clamp(c, 0, cols - 1);
    return v[static_cast<std::size_t>(r) * cols + c];
  }
};

Gray luma(const Image& img) {
  Gray g{img.rows(), img.cols(), std::vector<double>(static_cast<std::size_t>(img.rows()) * img.cols())};
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      g.v[static_cast<std::size_t>(r) * g.cols + c] =
          0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
  return g;
}

Gray half(const Gray& g) {
  Gray h{g.rows / 2, g.cols / 2, {}};
  h.v.resize(static_cast<std::size_t>(h.rows) * h.cols);
  for (int r = 0; r < h.rows; ++r)
    for (int c = 0; c < h.cols; ++c)
      h.v[static_cast<std::size_t>(r) * h.cols + c] =
          0.25 * (g.clamped(2 * r, 2 * c) + g.clamped(2 * r, 2 * c + 1) + g.clamped(2 * r + 1, 2 * c) +
                  g.clamped(2 * r + 1, 2 * c + 1));
  return h;
}

struct CellFlow {
  int rows = 0;
  int cols = 0;
  std::vector<int> dx, dy;
};

// Candidate order: smaller squared displacement first, then row-major on (dy, dx).
bool better(double cost, int dx, int dy, double best_cost, int best_dx, int best_dy) {
  if (cost != best_cost) return cost < best_cost;
  const int m = dx * dx + dy * dy, bm = best_dx * best_dx + best_dy * best_dy;
  if (m != bm) return m < bm;
  return dy != best_dy ? dy < best_dy : dx < best_dx;
}

CellFlow match_level(const Gray& a, const Gray& b, const BlockMatchParams& p, const CellFlow* coarse, int radius) {
  CellFlow out;
  out.rows = (a.rows + p.cell - 1) / p.cell;
  out.cols = (a.cols + p.cell - 1) / p.cell;
  out.dx.assign(static_cast<std::size_t>(out.rows) * out.cols, 0);
  out.dy.assign(out.dx.size(), 0);
  const int half_window = p.window / 2;
  std::vector<double> patch(static_cast<std::size_t>(p.window) * p.window);

  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) {
      // Window centered on the cell center.
      const int top = i * p.cell + p.cell / 2 - half_window;
      const int left = j * p.cell + p.cell / 2 - half_window;
      for (int r = 0; r < p.window; ++r)
        for (int c = 0; c < p.window; ++c) patch[r * p.window + c] = a.clamped(top + r, left + c);

      int px = 0, py = 0;
      if (coarse) {
        const int ci = std::min((i * p.cell + p.cell / 2) / 2 / p.cell, coarse->rows - 1);
        const int cj = std::min((j * p.cell + p.cell / 2) / 2 / p.cell, coarse->cols - 1);
        px = 2 * coarse->dx[static_cast<std::size_t>(ci) * coarse->cols + cj];
        py = 2 * coarse->dy[static_cast<std::size_t>(ci) * coarse->cols + cj];
      }
      double best = std::numeric_limits<double>::infinity();
      int bx = 0, by = 0;
      for (int dy = py - radius; dy <= py + radius; ++dy)
        for (int dx = px - radius; dx <= px + radius; ++dx) {
          double sad = 0.0;
          for (int r = 0; r < p.window && sad <= best; ++r)
            for (int c = 0; c < p.window; ++c) sad += std::abs(patch[r * p.window + c] - b.clamped(top + r + dy, left + c + dx));
          if (better(sad, dx, dy, best, bx, by)) {
            best = sad;
            bx = dx;
            by = dy;
          }
        }
      out.dx[static_cast<std::size_t>(i) * out.cols + j] = bx;
      out.dy[static_cast<std::size_t>(i) * out.cols + j] = by;
    }
  return out;
}

}  // namespace

FlowField estimate_flow(const Image& a, const Image& b, const BlockMatchParams& p) {
  if (!a.same_shape(b)) throw ShapeError("estimate_flow: frames differ in size");
  if (a.rows() < p.window || a.cols() < p.window)
    throw ArgumentError("estimate_flow: frames must be at least " + std::to_string(p.window) + " pixels on each side");
  if (p.levels < 1 || p.cell < 1 || p.window < 1) throw ArgumentError("estimate_flow: invalid parameters");

  std::vector<Gray> pa{luma(a)}, pb{luma(b)};
  while (static_cast<int>(pa.size()) < p.levels) {
    Gray na = half(pa.back());
    if (na.rows < p.window || na.cols < p.window) break;
    pa.push_back(std::move(na));
    pb.push_back(half(pb.back()));
  }

  CellFlow flow;
  for (int level = static_cast<int>(pa.size()) - 1; level >= 0; --level) {
    const bool coarsest = level == static_cast<int>(pa.size()) - 1;
    flow = match_level(pa[level], pb[level], p, coarsest ? nullptr : &flow, coarsest ? p.coarse_radius : p.refine_radius);
  }

  FlowField out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      const std::size_t cell = static_cast<std::size_t>(r / p.cell) * flow.cols + c / p.cell;
      const std::size_t i = out.index(r, c);
      out.dcol[i] = flow.dx[cell];
      out.drow[i] = flow.dy[cell];
      out.valid[i] = 1;
    }
  return out;
}

}  // namespace pdg
