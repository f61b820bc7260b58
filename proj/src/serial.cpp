#include "autofocus/serial.hpp"

#include <algorithm>
#include <string>

namespace autofocus::serial {

BitMask binarize(const ProbMap& map, double t) {
  BitMask mask(map.width(), map.height(), 0);
  const float thr = static_cast<float>(t);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) mask.at(x, y) = map.at(x, y) > thr ? 1 : 0;
  }
  return mask;
}

BitMask dilate(const BitMask& mask, int d) {
  if (d < 1 || d % 2 == 0) throw std::invalid_argument("dilation side must be odd, got " + std::to_string(d));
  const int r = (d - 1) / 2;
  BitMask out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool hit = false;
      for (int yy = std::max(0, y - r); yy <= std::min(mask.height() - 1, y + r) && !hit; ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(mask.width() - 1, x + r); ++xx) {
          if (mask.at(xx, yy)) {
            hit = true;
            break;
          }
        }
      }
      out.at(x, y) = hit ? 1 : 0;
    }
  }
  return out;
}

LabelMap assign_labels(std::span<const BoxPx> gt_boxes, int chip_w, int chip_h, const LabelParams& params,
                       std::optional<Space> expected) {
  params.validate();
  detail::check_label_spaces(gt_boxes, expected);
  const LabelDims dims = label_map_dims(chip_w, chip_h, params.stride);
  const int s = params.stride;
  LabelMap labels(dims.width, dims.height, 0);
  for (const auto& box : gt_boxes) {
    const LabelClass cls = classify_size(box.sqrt_area(), params);
    if (cls == LabelClass::Negative) continue;
    for (int r = 0; r < dims.height; ++r) {
      const double by0 = double(r) * s;
      const double by1 = std::min(double(r + 1) * s, double(chip_h));
      if (!(std::min(box.bottom(), by1) > std::max(box.y(), by0))) continue;
      for (int c = 0; c < dims.width; ++c) {
        const double bx0 = double(c) * s;
        const double bx1 = std::min(double(c + 1) * s, double(chip_w));
        if (!(std::min(box.right(), bx1) > std::max(box.x(), bx0))) continue;
        auto& cell = labels.at(c, r);
        if (cls == LabelClass::Positive) {
          cell = 1;
        } else if (cell == 0) {
          cell = -1;
        }
      }
    }
  }
  return labels;
}

}  // namespace autofocus::serial
