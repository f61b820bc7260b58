#pragma once

// Brute-force references used by the tests. Deliberately naive and written
// without calling the library routines they check.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"
#include "autofocus/labeler.hpp"

namespace oracle {

using autofocus::BoxPx;

struct Rect {
  double x, y, w, h;
  auto key() const { return std::tuple(y, x, h, w); }
  friend bool operator<(const Rect& a, const Rect& b) { return a.key() < b.key(); }
  friend bool operator==(const Rect& a, const Rect& b) { return a.key() == b.key(); }
};

inline double overlap_len(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

inline bool rects_overlap(const Rect& a, const Rect& b) {
  return overlap_len(a.x, a.x + a.w, b.x, b.x + b.w) > 0 && overlap_len(a.y, a.y + a.h, b.y, b.y + b.h) > 0;
}

// One block at a time, every box tested against the block's clipped pixel extent.
inline std::vector<std::vector<int>> labels(const std::vector<BoxPx>& boxes, int W, int H,
                                            const autofocus::LabelParams& p) {
  const int s = p.stride;
  const int cols = (W + s - 1) / s, rows = (H + s - 1) / s;
  std::vector<std::vector<int>> out(rows, std::vector<int>(cols, 0));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double bx0 = c * s, bx1 = std::min((c + 1) * s, W);
      const double by0 = r * s, by1 = std::min((r + 1) * s, H);
      bool pos = false, neg = false;
      for (const auto& b : boxes) {
        if (!(overlap_len(bx0, bx1, b.x(), b.x() + b.w()) > 0 && overlap_len(by0, by1, b.y(), b.y() + b.h()) > 0)) {
          continue;
        }
        const double side = std::sqrt(b.w() * b.h());
        if (side >= p.a && side <= p.b) pos = true;
        if (side < p.a || (side > p.b && side < p.c)) neg = true;
      }
      out[r][c] = pos ? 1 : (neg ? -1 : 0);
    }
  }
  return out;
}

// Threshold, per-cell window dilation, BFS flood fill, enclose, then merge
// any overlapping pair until none is left.
inline std::vector<Rect> chips(const autofocus::ProbMap& map, double t, int d, double k, int W, int H, int s) {
  const int cols = map.width(), rows = map.height();
  const float thr = static_cast<float>(t);
  std::vector<std::vector<int>> on(rows, std::vector<int>(cols, 0));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) on[r][c] = map.at(c, r) > thr;

  const int rad = (d - 1) / 2;
  std::vector<std::vector<int>> grown(rows, std::vector<int>(cols, 0));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int dr = -rad; dr <= rad; ++dr)
        for (int dc = -rad; dc <= rad; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr >= 0 && rr < rows && cc >= 0 && cc < cols && on[rr][cc]) grown[r][c] = 1;
        }

  std::vector<std::vector<int>> seen(rows, std::vector<int>(cols, 0));
  std::vector<Rect> rects;
  const int side = static_cast<int>(std::ceil(k - 1e-9));
  auto fit = [&](int lo, int hi, int extent) {
    if (extent <= side) return std::pair(0, extent);
    int len = hi - lo;
    if (len < side) {
      const int extra = side - len;
      lo -= extra / 2;
      hi = lo + side;
    }
    if (lo < 0) hi -= lo, lo = 0;
    if (hi > extent) lo -= hi - extent, hi = extent;
    return std::pair(lo, hi);
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (!grown[r][c] || seen[r][c]) continue;
      int c0 = c, c1 = c, r0 = r, r1 = r;
      std::deque<std::pair<int, int>> q{{r, c}};
      seen[r][c] = 1;
      while (!q.empty()) {
        auto [cr, cc] = q.front();
        q.pop_front();
        c0 = std::min(c0, cc), c1 = std::max(c1, cc), r0 = std::min(r0, cr), r1 = std::max(r1, cr);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = cr + dr, nc = cc + dc;
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols || seen[nr][nc] || !grown[nr][nc]) continue;
            seen[nr][nc] = 1;
            q.push_back({nr, nc});
          }
      }
      auto [x0, x1] = fit(c0 * s, std::min((c1 + 1) * s, W), W);
      auto [y0, y1] = fit(r0 * s, std::min((r1 + 1) * s, H), H);
      rects.push_back({double(x0), double(y0), double(x1 - x0), double(y1 - y0)});
    }

  for (bool again = true; again;) {
    again = false;
    for (std::size_t i = 0; i < rects.size() && !again; ++i)
      for (std::size_t j = i + 1; j < rects.size() && !again; ++j) {
        if (!rects_overlap(rects[i], rects[j])) continue;
        const auto& a = rects[i];
        const auto& b = rects[j];
        const double x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
        const double x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
        rects[i] = {x0, y0, x1 - x0, y1 - y0};
        rects.erase(rects.begin() + static_cast<std::ptrdiff_t>(j));
        again = true;
      }
  }
  std::sort(rects.begin(), rects.end());
  return rects;
}

inline double box_iou(const BoxPx& a, const BoxPx& b) {
  const double iw = std::max(0.0, overlap_len(a.x(), a.x() + a.w(), b.x(), b.x() + b.w()));
  const double ih = std::max(0.0, overlap_len(a.y(), a.y() + a.h(), b.y(), b.y() + b.h()));
  const double inter = iw * ih;
  return inter / (a.w() * a.h() + b.w() * b.h() - inter);
}

struct ScoredBox {
  BoxPx box;
  double score;
  int category;
  int image = 0;
};

struct TruthBox {
  BoxPx box;
  int category;
  int image = 0;
};

// For every prefix of the ranked list, redo the greedy matching from scratch
// and read off precision/recall; interpolate at 101 recall points.
inline double ap_brute(std::vector<ScoredBox> dets, const std::vector<TruthBox>& gts, double thr) {
  std::set<int> cats;
  for (const auto& g : gts) cats.insert(g.category);
  if (cats.empty()) return 0;
  std::stable_sort(dets.begin(), dets.end(), [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
  double total = 0;
  for (const int cat : cats) {
    std::vector<ScoredBox> cd;
    for (const auto& d : dets)
      if (d.category == cat) cd.push_back(d);
    std::vector<TruthBox> cg;
    for (const auto& g : gts)
      if (g.category == cat) cg.push_back(g);
    std::vector<std::pair<double, double>> pr;  // (recall, precision)
    for (std::size_t n = 1; n <= cd.size(); ++n) {
      std::vector<bool> used(cg.size(), false);
      int tp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        int best = -1;
        double best_iou = -1;
        for (std::size_t j = 0; j < cg.size(); ++j) {
          if (used[j] || cg[j].image != cd[i].image) continue;
          const double o = box_iou(cd[i].box, cg[j].box);
          if (o >= thr && o > best_iou) best_iou = o, best = int(j);
        }
        if (best >= 0) used[best] = true, ++tp;
      }
      pr.push_back({double(tp) / cg.size(), double(tp) / n});
    }
    double sum = 0;
    for (int j = 0; j <= 100; ++j) {
      const double r = j / 100.0;
      double p = 0;
      for (const auto& [rec, prec] : pr)
        if (rec >= r) p = std::max(p, prec);
      sum += p;
    }
    total += sum / 101;
  }
  return total / cats.size();
}

}  // namespace oracle
