#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"

namespace autofocus {

// Thresholds on sqrt(GT area) measured after the GT has been scaled into the
// chip fed to the network.
struct LabelParams {
  int stride = 16;
  double a = 5;
  double b = 64;
  double c = 90;

  void validate() const;
};

enum class LabelClass : std::int8_t { Invalid = -1, Negative = 0, Positive = 1 };

// Band membership of a single GT:
//   [0, a) invalid, [a, b] positive, (b, c) invalid, [c, inf) no label.
LabelClass classify_size(double sqrt_area, const LabelParams& params);

struct LabelDims {
  int width = 0;
  int height = 0;
  friend bool operator==(const LabelDims&, const LabelDims&) = default;
};

LabelDims label_map_dims(int chip_w, int chip_h, int stride);

// Inclusive cell range along one axis whose blocks [c*s, min((c+1)*s, extent))
// overlap the open interval (lo, hi) with positive length. Empty when first > last.
struct CellSpan {
  int first = 0;
  int last = -1;
  bool empty() const { return first > last; }
};
CellSpan covered_cells(double lo, double hi, int extent, int stride);

// FocusPixel labels for a chip of chip_w x chip_h pixels. Every GT must carry
// the same scaled-image or chip-local tag (or `expected` when given). Blocks
// touched by a positive-band GT are +1 regardless of other GTs.
LabelMap assign_labels(std::span<const BoxPx> gt_boxes, int chip_w, int chip_h, const LabelParams& params,
                       std::optional<Space> expected = std::nullopt);

struct LabelStats {
  std::int64_t positive = 0;
  std::int64_t negative = 0;
  std::int64_t invalid = 0;
  // negative / positive; +inf when there are no positives.
  double neg_per_pos = 0;
  // positive / negative; +inf when there are no negatives.
  double pos_per_neg = 0;
};

LabelStats label_stats(const LabelMap& map);

namespace detail {
void check_label_spaces(std::span<const BoxPx> gt_boxes, std::optional<Space> expected);
}

}  // namespace autofocus
