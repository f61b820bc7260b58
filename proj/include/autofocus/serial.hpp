#pragma once

// Straightforward single-threaded versions of the OpenMP kernels. They trade
// speed for obviousness and exist so tests and benchmarks have a reference.

#include <optional>
#include <span>

#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"
#include "autofocus/labeler.hpp"

namespace autofocus::serial {

BitMask binarize(const ProbMap& map, double t);

// Per-cell scan of the full d x d window.
BitMask dilate(const BitMask& mask, int d);

// Per box, tests every block of the map for positive-area overlap.
LabelMap assign_labels(std::span<const BoxPx> gt_boxes, int chip_w, int chip_h, const LabelParams& params,
                       std::optional<Space> expected = std::nullopt);

}  // namespace autofocus::serial
