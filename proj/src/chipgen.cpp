#include "autofocus/chipgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace autofocus {

void ChipParams::validate() const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("chip threshold t must lie in [0,1]");
  if (d < 1 || d % 2 == 0) throw std::invalid_argument("dilation side d must be odd and >= 1");
  if (!(k >= 1)) throw std::invalid_argument("minimum chip side k must be >= 1");
}

BitMask binarize(const ProbMap& map, double t) {
  BitMask mask(map.width(), map.height(), 0);
  const auto src = map.cells();
  auto dst = mask.cells();
  const auto n = static_cast<std::ptrdiff_t>(src.size());
  // Threshold is applied in the map's own precision, so a cell stored as t stays clear.
  const float thr = static_cast<float>(t);
#pragma omp parallel for simd schedule(static) if (n > 1 << 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = src[i] > thr;
  return mask;
}

BitMask dilate(const BitMask& mask, int d) {
  if (d < 1 || d % 2 == 0) throw std::invalid_argument("dilation side must be odd, got " + std::to_string(d));
  if (d == 1) return mask;
  const int r = (d - 1) / 2;
  const int w = mask.width();
  const int h = mask.height();
  const bool big = mask.size() > (1u << 14);

  // Separable: horizontal then vertical max via running counts.
  BitMask horiz(w, h, 0);
#pragma omp parallel for schedule(static) if (big)
  for (int y = 0; y < h; ++y) {
    const auto src = mask.row(y);
    auto dst = horiz.row(y);
    int count = 0;
    for (int x = 0; x < std::min(r, w); ++x) count += src[x];
    for (int x = 0; x < w; ++x) {
      if (x + r < w) count += src[x + r];
      if (x - r - 1 >= 0) count -= src[x - r - 1];
      dst[x] = count > 0;
    }
  }

  BitMask out(w, h, 0);
#pragma omp parallel for schedule(static) if (big)
  for (int x = 0; x < w; ++x) {
    int count = 0;
    for (int y = 0; y < std::min(r, h); ++y) count += horiz.at(x, y);
    for (int y = 0; y < h; ++y) {
      if (y + r < h) count += horiz.at(x, y + r);
      if (y - r - 1 >= 0) count -= horiz.at(x, y - r - 1);
      out.at(x, y) = count > 0;
    }
  }
  return out;
}

std::vector<Component> connected_components(const BitMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Grid<std::uint8_t> seen(w, h, 0);
  std::vector<Component> comps;
  std::vector<CellIndex> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || seen.at(x, y)) continue;
      Component comp;
      comp.bounds = {x, y, x, y};
      seen.at(x, y) = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const CellIndex cur = stack.back();
        stack.pop_back();
        comp.cells.push_back(cur);
        comp.bounds.col0 = std::min(comp.bounds.col0, cur.col);
        comp.bounds.col1 = std::max(comp.bounds.col1, cur.col);
        comp.bounds.row0 = std::min(comp.bounds.row0, cur.row);
        comp.bounds.row1 = std::max(comp.bounds.row1, cur.row);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cur.col + dx;
            const int ny = cur.row + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!mask.at(nx, ny) || seen.at(nx, ny)) continue;
            seen.at(nx, ny) = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      std::sort(comp.cells.begin(), comp.cells.end(),
                [](const CellIndex& a, const CellIndex& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
      comps.push_back(std::move(comp));
    }
  }
  // Discovery order is already scan order of first cell; stable sort keeps it as tie-break.
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return std::tie(a.bounds.row0, a.bounds.col0) < std::tie(b.bounds.row0, b.bounds.col0);
  });
  return comps;
}

namespace {

// Grow [lo, hi) to at least `side` within [0, extent), then shift inside.
void expand_axis(int& lo, int& hi, int side, int extent) {
  if (extent <= side) {
    lo = 0;
    hi = extent;
    return;
  }
  const int need = side - (hi - lo);
  if (need > 0) {
    lo -= need / 2;
    hi += need - need / 2;
  }
  if (lo < 0) {
    hi -= lo;
    lo = 0;
  }
  if (hi > extent) {
    lo -= hi - extent;
    hi = extent;
  }
}

bool overlaps(const BoxPx& a, const BoxPx& b) { return intersection_area(a, b) > 0; }

}  // namespace

std::vector<FocusChip> enclose_components(std::span<const Component> components, double k, int image_w,
                                          int image_h, int stride, int source_scale) {
  if (image_w <= 0 || image_h <= 0 || stride < 1) throw std::invalid_argument("bad image geometry for chips");
  // Tolerate k that came out of a zoom ratio a hair above an integer.
  const int side = static_cast<int>(std::ceil(k - 1e-9));
  std::vector<FocusChip> chips;
  chips.reserve(components.size());
  int next_id = 0;
  for (const auto& comp : components) {
    int x0 = comp.bounds.col0 * stride;
    int x1 = std::min((comp.bounds.col1 + 1) * stride, image_w);
    int y0 = comp.bounds.row0 * stride;
    int y1 = std::min((comp.bounds.row1 + 1) * stride, image_h);
    expand_axis(x0, x1, side, image_w);
    expand_axis(y0, y1, side, image_h);
    chips.push_back({BoxPx(x0, y0, x1 - x0, y1 - y0, Space::scaled(source_scale)), source_scale, next_id++});
  }
  return chips;
}

std::vector<FocusChip> merge_chips(std::span<const FocusChip> chips) {
  std::vector<FocusChip> out;
  for (const auto& chip : chips) {
    FocusChip cur = chip;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (overlaps(cur.rect, out[j].rect)) {
          cur.rect = enclosing(cur.rect, out[j].rect);
          cur.id = std::min(cur.id, out[j].id);
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
          grew = true;
          break;
        }
      }
    }
    out.push_back(cur);
  }
  std::sort(out.begin(), out.end(), [](const FocusChip& a, const FocusChip& b) {
    return std::tuple(a.rect.y(), a.rect.x(), a.rect.h(), a.rect.w()) <
           std::tuple(b.rect.y(), b.rect.x(), b.rect.h(), b.rect.w());
  });
  return out;
}

std::vector<FocusChip> generate_chips(const ProbMap& map, const ChipParams& params, int image_w, int image_h,
                                      int stride, int source_scale) {
  params.validate();
  if (image_w <= 0 || image_h <= 0 || stride < 1) throw std::invalid_argument("bad image geometry for chips");
  if (map.width() != ceil_div(image_w, stride) || map.height() != ceil_div(image_h, stride)) {
    throw std::invalid_argument("focus map is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                                " but image " + std::to_string(image_w) + "x" + std::to_string(image_h) +
                                " at stride " + std::to_string(stride) + " needs " +
                                std::to_string(ceil_div(image_w, stride)) + "x" +
                                std::to_string(ceil_div(image_h, stride)));
  }
  const BitMask grown = dilate(binarize(map, params.t), params.d);
  const auto comps = connected_components(grown);
  auto chips = merge_chips(enclose_components(comps, params.k, image_w, image_h, stride, source_scale));
  for (std::size_t i = 0; i < chips.size(); ++i) chips[i].id = static_cast<int>(i);
  return chips;
}

}  // namespace autofocus
