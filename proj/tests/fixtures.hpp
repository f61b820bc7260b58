#pragma once

#include <random>
#include <vector>

#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"
#include "autofocus/labeler.hpp"

namespace fixtures {

// Sparse-ish random probability map: blobs of high values over a low floor.
inline autofocus::ProbMap random_map(std::mt19937_64& rng, int w, int h) {
  autofocus::ProbMap m(w, h, 0.0f);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const double density = std::uniform_real_distribution<double>(0.0, 0.15)(rng);
  for (auto& v : m.cells()) {
    const float x = u(rng);
    v = x < density ? 0.5f + 0.5f * u(rng) : 0.6f * u(rng);
  }
  // a few exact threshold values
  std::uniform_int_distribution<int> cx(0, w - 1), cy(0, h - 1);
  for (int i = 0; i < 3; ++i) m.at(cx(rng), cy(rng)) = 0.5f;
  return m;
}

// Boxes inside a w x h chip, including sizes sitting exactly on a, b and c.
inline std::vector<autofocus::BoxPx> random_boxes(std::mt19937_64& rng, int w, int h,
                                                  const autofocus::LabelParams& p, autofocus::Space space) {
  std::uniform_int_distribution<int> count(0, 10);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<autofocus::BoxPx> boxes;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    double side;
    const double pick = u(rng);
    if (pick < 0.1) {
      side = p.a;
    } else if (pick < 0.2) {
      side = p.b;
    } else if (pick < 0.3) {
      side = p.c;
    } else {
      side = 1 + u(rng) * 1.4 * p.c;
    }
    const double bw = side, bh = side;
    double x, y;
    if (pick < 0.3 && bw <= w && bh <= h) {
      // band-edge sizes stay whole so the clip cannot move them off the edge
      x = std::floor(u(rng) * (w - bw + 1));
      y = std::floor(u(rng) * (h - bh + 1));
    } else {
      // integer or half-integer placement to hit block edges often
      x = std::floor(u(rng) * 2 * w) / 2 - bw / 3;
      y = std::floor(u(rng) * 2 * h) / 2 - bh / 3;
    }
    auto clipped = autofocus::clip_to(autofocus::BoxPx(x, y, bw, bh, space), w, h);
    if (clipped) boxes.push_back(*clipped);
  }
  return boxes;
}

}  // namespace fixtures
