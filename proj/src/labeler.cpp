#include "autofocus/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace autofocus {

void LabelParams::validate() const {
  if (stride < 1) throw std::invalid_argument("label stride must be >= 1");
  if (!(0 < a && a < b && b < c)) throw std::invalid_argument("label thresholds need 0 < a < b < c");
}

LabelClass classify_size(double sqrt_area, const LabelParams& params) {
  if (sqrt_area < params.a) return LabelClass::Invalid;
  if (sqrt_area <= params.b) return LabelClass::Positive;
  if (sqrt_area < params.c) return LabelClass::Invalid;
  return LabelClass::Negative;
}

LabelDims label_map_dims(int chip_w, int chip_h, int stride) {
  if (chip_w <= 0 || chip_h <= 0 || stride <= 0) {
    throw std::invalid_argument("label_map_dims needs positive chip size and stride");
  }
  return {ceil_div(chip_w, stride), ceil_div(chip_h, stride)};
}

CellSpan covered_cells(double lo, double hi, int extent, int stride) {
  if (extent <= 0 || !(lo < extent) || !(hi > 0) || !(hi > lo)) return {};
  const int cells = ceil_div(extent, stride);
  const auto block_end = [&](int c) { return std::min(static_cast<double>(c + 1) * stride, double(extent)); };

  // Division gives a guess; exact comparisons against integer block edges settle it.
  int first = static_cast<int>(std::floor(std::max(lo, 0.0) / stride));
  first = std::clamp(first, 0, cells - 1);
  while (first > 0 && lo < block_end(first - 1)) --first;
  while (first < cells && !(lo < block_end(first))) ++first;

  int last = static_cast<int>(std::ceil(std::min(hi, double(extent)) / stride)) - 1;
  last = std::clamp(last, 0, cells - 1);
  while (last < cells - 1 && hi > static_cast<double>(last + 1) * stride) ++last;
  while (last >= 0 && !(hi > static_cast<double>(last) * stride)) --last;
  return {first, last};
}

namespace detail {

void check_label_spaces(std::span<const BoxPx> gt_boxes, std::optional<Space> expected) {
  if (gt_boxes.empty()) return;
  const Space want = expected.value_or(gt_boxes.front().space());
  if (want.kind != SpaceKind::ScaledImage && want.kind != SpaceKind::ChipLocal) {
    throw SpaceMismatch(want, Space::chip(0));
  }
  for (const auto& box : gt_boxes) require_same_space(box.space(), want);
}

}  // namespace detail

namespace {

struct Footprint {
  CellSpan cols;
  CellSpan rows;
  std::int8_t label;
};

}  // namespace

LabelMap assign_labels(std::span<const BoxPx> gt_boxes, int chip_w, int chip_h, const LabelParams& params,
                       std::optional<Space> expected) {
  params.validate();
  detail::check_label_spaces(gt_boxes, expected);
  const LabelDims dims = label_map_dims(chip_w, chip_h, params.stride);
  LabelMap labels(dims.width, dims.height, 0);

  std::vector<Footprint> prints;
  prints.reserve(gt_boxes.size());
  for (const auto& box : gt_boxes) {
    const LabelClass cls = classify_size(box.sqrt_area(), params);
    if (cls == LabelClass::Negative) continue;
    Footprint fp{covered_cells(box.x(), box.right(), chip_w, params.stride),
                 covered_cells(box.y(), box.bottom(), chip_h, params.stride), static_cast<std::int8_t>(cls)};
    if (!fp.cols.empty() && !fp.rows.empty()) prints.push_back(fp);
  }

  const int height = dims.height;
#pragma omp parallel for schedule(static) if (labels.size() * prints.size() > 65536)
  for (int r = 0; r < height; ++r) {
    auto row = labels.row(r);
    for (const auto& fp : prints) {
      if (r < fp.rows.first || r > fp.rows.last) continue;
      for (int c = fp.cols.first; c <= fp.cols.last; ++c) {
        // +1 wins over -1 wins over 0
        if (fp.label == 1 || row[c] == 0) row[c] = fp.label;
      }
    }
  }
  return labels;
}

LabelStats label_stats(const LabelMap& map) {
  LabelStats st;
  for (const auto v : map.cells()) {
    if (v > 0) {
      ++st.positive;
    } else if (v < 0) {
      ++st.invalid;
    } else {
      ++st.negative;
    }
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  st.neg_per_pos = st.positive == 0 ? inf : double(st.negative) / double(st.positive);
  st.pos_per_neg = st.negative == 0 ? inf : double(st.positive) / double(st.negative);
  return st;
}

}  // namespace autofocus
