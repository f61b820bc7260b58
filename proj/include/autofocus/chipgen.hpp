#pragma once

#include <span>
#include <vector>

#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"

namespace autofocus {

struct ChipParams {
  double t = 0.5;  // probability threshold, strict
  int d = 3;       // dilation side in feature-map cells, odd
  double k = 512;  // minimum chip side in pixels

  void validate() const;
};

// A region selected for zoom-in. `rect` lives in the scaled-image space of the
// scale whose focus map produced it.
struct FocusChip {
  BoxPx rect;
  int source_scale = 1;
  int id = 0;
};

// Inclusive cell bounds.
struct CellRect {
  int col0 = 0;
  int row0 = 0;
  int col1 = -1;
  int row1 = -1;
  friend bool operator==(const CellRect&, const CellRect&) = default;
};

struct CellIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct Component {
  std::vector<CellIndex> cells;  // row-major scan order
  CellRect bounds;
};

BitMask binarize(const ProbMap& map, double t);

// Square structuring element of side d (odd), clipped at the borders.
BitMask dilate(const BitMask& mask, int d);

// 8-connected components ordered by the top-left corner of their bounds
// (row first), ties broken by scan order of the first cell.
std::vector<Component> connected_components(const BitMask& mask);

// Cell bounds -> pixel rectangles of side >= min(k, image side). Growth is
// split evenly with the odd pixel going right/bottom, then the rectangle is
// shifted back inside the image.
std::vector<FocusChip> enclose_components(std::span<const Component> components, double k, int image_w,
                                          int image_h, int stride, int source_scale = 1);

// Replace overlapping (positive-area) chips by their enclosing box until none
// overlap. Result is sorted by (y, x, h, w); each keeps the smallest input id.
std::vector<FocusChip> merge_chips(std::span<const FocusChip> chips);

// Threshold -> dilate -> components -> enclose -> merge. Ids are 0..n-1 in
// output order.
std::vector<FocusChip> generate_chips(const ProbMap& map, const ChipParams& params, int image_w, int image_h,
                                      int stride, int source_scale = 1);

}  // namespace autofocus
