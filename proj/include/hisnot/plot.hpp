#pragma once

#include <algorithm>
#include <string>

#include "hisnot/basis.hpp"
#include "hisnot/datasets.hpp"
#include "hisnot/svg.hpp"
#include "hisnot/trainer.hpp"

namespace hisnot {

// Scatter of source, target and transported samples in the (c1, c2)
// coefficient plane with displacement segments; fixed axes [-1.2, 1.2]^2.
inline std::string plot_coefficient_plane(const EvalBatches& b, const Seeds& seeds,
                                          const std::string& title, int max_points = 400,
                                          int max_segments = 150) {
  if (b.source.rows() == 0) throw std::invalid_argument("plot: empty batch");
  const double W = 560, H = 560;
  const double m = 60;                       // margin
  const double lo = -1.2, hi = 1.2;
  const auto px = [&](double c) { return m + (c - lo) / (hi - lo) * (W - 2 * m); };
  const auto py = [&](double c) { return H - m - (c - lo) / (hi - lo) * (H - 2 * m); };

  svg::Canvas canvas(W, H);
  canvas.rect(px(lo), py(hi), px(hi) - px(lo), py(lo) - py(hi), "none", "#444444");
  for (double tick : {-1.0, 0.0, 1.0}) {
    canvas.line(px(tick), py(lo), px(tick), py(lo) + 5, "#444444");
    canvas.text(px(tick), py(lo) + 18, svg::num(tick), 11, "#444444", "middle");
    canvas.line(px(lo) - 5, py(tick), px(lo), py(tick), "#444444");
    canvas.text(px(lo) - 8, py(tick) + 4, svg::num(tick), 11, "#444444", "end");
  }
  canvas.text(W / 2, H - 14, "c1 (sin pi t)", 12, "#222222", "middle");
  canvas.text(14, H / 2, "c2 (sin 2 pi t)", 12, "#222222", "middle");
  canvas.text(W / 2, 24, title, 13, "#222222", "middle");

  const int c1 = slot_c1(), c2 = slot_c2();
  const int n = static_cast<int>(b.source.rows());
  const int n_pts = std::min(n, max_points);
  const int n_seg = std::min(n, max_segments);

  for (int i = 0; i < n_seg; ++i)
    canvas.line(px(b.smoothed(i, c1)), py(b.smoothed(i, c2)), px(b.transported(i, c1)),
                py(b.transported(i, c2)), "#bbbbbb", 0.6, 0.7);
  for (int i = 0; i < n_pts; ++i)
    canvas.circle(px(b.source(i, c1)), py(b.source(i, c2)), 2.2, "#1f77b4", 0.75);
  for (int i = 0; i < n_pts; ++i)
    canvas.circle(px(b.target(i, c1)), py(b.target(i, c2)), 2.2, "#ff7f0e", 0.75);
  for (int i = 0; i < n_pts; ++i)
    canvas.circle(px(b.transported(i, c1)), py(b.transported(i, c2)), 2.2, "#2ca02c", 0.75);

  // legend
  const double lx = W - m - 150, ly = m + 10;
  canvas.rect(lx - 10, ly - 14, 160, 64, "white", "#888888");
  canvas.circle(lx, ly, 3, "#1f77b4");
  canvas.text(lx + 10, ly + 4, "source", 11);
  canvas.circle(lx, ly + 16, 3, "#ff7f0e");
  canvas.text(lx + 10, ly + 20, "target", 11);
  canvas.circle(lx, ly + 32, 3, "#2ca02c");
  canvas.text(lx + 10, ly + 36, "transported", 11);

  canvas.text(m, H - 30,
              "seeds data=" + std::to_string(seeds.data) + " noise=" + std::to_string(seeds.noise) +
                  " init=" + std::to_string(seeds.init) + " eval=" + std::to_string(seeds.eval),
              10, "#666666");
  return canvas.finish();
}

// Five sample curves reconstructed on a grid, before (left) and after (right)
// transport.
inline std::string plot_function_strip(const EvalBatches& b, const BasisSpec& basis,
                                       const std::string& title) {
  if (b.source.rows() < 1) throw std::invalid_argument("plot: empty batch");
  const int n_curves = std::min<int>(5, static_cast<int>(b.source.rows()));
  const double W = 760, H = 320, m = 46, gap = 40;
  const double panel_w = (W - 2 * m - gap) / 2;
  const double lo = -2.0, hi = 2.0;
  const Vec grid = uniform_grid(201);
  const char* colors[5] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};

  svg::Canvas canvas(W, H);
  canvas.text(W / 2, 22, title, 13, "#222222", "middle");
  for (int panel = 0; panel < 2; ++panel) {
    const double x0 = m + panel * (panel_w + gap);
    const auto px = [&](double t) { return x0 + (t + 1.0) / 2.0 * panel_w; };
    const auto py = [&](double v) {
      const double c = std::clamp(v, lo, hi);
      return H - m - (c - lo) / (hi - lo) * (H - 2 * m - 20);
    };
    canvas.rect(x0, py(hi), panel_w, py(lo) - py(hi), "none", "#444444");
    canvas.line(x0, py(0.0), x0 + panel_w, py(0.0), "#dddddd", 0.8);
    canvas.text(x0 + panel_w / 2, H - 10, panel == 0 ? "input samples" : "transported samples",
                12, "#222222", "middle");
    for (int i = 0; i < n_curves; ++i) {
      FunctionSample f{panel == 0 ? Vec(b.smoothed.row(i)) : Vec(b.transported.row(i)), basis};
      const GridFunction g = reconstruct(f, grid);
      canvas.polyline_begin(colors[i], 1.2);
      for (Index j = 0; j < grid.size(); ++j) canvas.polyline_point(px(grid[j]), py(g.values[j]));
      canvas.polyline_end();
    }
  }
  return canvas.finish();
}

}  // namespace hisnot
