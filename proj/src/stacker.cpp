#include "autofocus/stacker.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace autofocus {

void StackParams::validate() const {
  if (!(sigma > 0)) throw std::invalid_argument("soft-nms sigma must be positive");
  if (!(score_floor >= 0 && score_floor < 1)) throw std::invalid_argument("score floor must lie in [0,1)");
  if (!(boundary_tolerance >= 0)) throw std::invalid_argument("boundary tolerance must be >= 0");
}

namespace {

constexpr double kEdgeEps = 1e-6;

// Higher score first, then box, then category.
bool ranks_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (box_less(a.box, b.box)) return true;
  if (box_less(b.box, a.box)) return false;
  return std::tuple(a.category, a.scale_index, a.chip_id.value_or(-1)) <
         std::tuple(b.category, b.scale_index, b.chip_id.value_or(-1));
}

}  // namespace

std::vector<Detection> prune_boundary_detections(std::span<const Detection> dets, const BoxPx& chip,
                                                 double image_w, double image_h, double tolerance) {
  if (chip.x() < -kEdgeEps || chip.y() < -kEdgeEps || chip.right() > image_w + kEdgeEps ||
      chip.bottom() > image_h + kEdgeEps) {
    throw std::invalid_argument("chip extends outside the image");
  }
  const bool left_open = chip.x() <= kEdgeEps;
  const bool top_open = chip.y() <= kEdgeEps;
  const bool right_open = chip.right() >= image_w - kEdgeEps;
  const bool bottom_open = chip.bottom() >= image_h - kEdgeEps;

  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const auto& det : dets) {
    if (det.box.space().kind != SpaceKind::ChipLocal) throw SpaceMismatch(det.box.space(), Space::chip(0));
    const auto& b = det.box;
    const bool at_left = b.x() <= tolerance;
    const bool at_top = b.y() <= tolerance;
    const bool at_right = b.right() >= chip.w() - tolerance;
    const bool at_bottom = b.bottom() >= chip.h() - tolerance;
    if ((at_left && !left_open) || (at_top && !top_open) || (at_right && !right_open) ||
        (at_bottom && !bottom_open)) {
      continue;
    }
    kept.push_back(det);
  }
  return kept;
}

std::vector<Detection> filter_valid_range(std::span<const Detection> dets, const ValidRange& range) {
  if (range.lo > range.hi) throw std::invalid_argument("valid range has lo > hi");
  std::vector<Detection> kept;
  for (const auto& det : dets) {
    if (range.contains(det.box.sqrt_area())) kept.push_back(det);
  }
  return kept;
}

std::vector<Detection> soft_nms(std::span<const Detection> dets, const StackParams& params) {
  params.validate();
  std::vector<Detection> pool(dets.begin(), dets.end());
  for (const auto& d : pool) require_same_space(d.box.space(), pool.front().box.space());

  std::vector<Detection> out;
  out.reserve(pool.size());
  while (!pool.empty()) {
    auto best = std::min_element(pool.begin(), pool.end(), ranks_before);
    Detection top = *best;
    pool.erase(best);
    for (auto& d : pool) {
      if (d.category != top.category) continue;
      const double overlap = iou(top.box, d.box);
      d.score *= std::exp(-(overlap * overlap) / params.sigma);
    }
    std::erase_if(pool, [&](const Detection& d) { return d.score < params.score_floor; });
    out.push_back(top);
  }
  std::stable_sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::vector<Detection> focus_stack(std::span<const ScaleGeometry> scales, std::span<const ChipDetections> chips,
                                   const PyramidConfig& config, const StackParams& params) {
  params.validate();
  const auto geometry_of = [&](int index) -> const ScaleGeometry& {
    for (const auto& g : scales) {
      if (g.index == index) return g;
    }
    throw std::invalid_argument("no geometry for scale " + std::to_string(index));
  };

  std::vector<Detection> pooled;
  for (const auto& chip : chips) {
    const ChipFrame& frame = chip.frame;
    const ScaleGeometry& geo = geometry_of(frame.scale_index);
    if (frame.scale_index < 1 || frame.scale_index > static_cast<int>(config.valid_ranges.size())) {
      throw std::invalid_argument("no valid range for scale " + std::to_string(frame.scale_index));
    }
    for (const auto& d : chip.detections) require_same_space(d.box.space(), Space::chip(frame.id));

    const auto kept =
        prune_boundary_detections(chip.detections, frame.scaled_rect(), geo.width, geo.height, params.boundary_tolerance);
    ProjectionContext ctx;
    ctx.chips = {frame};
    std::vector<Detection> projected;
    projected.reserve(kept.size());
    for (const auto& d : kept) {
      projected.emplace_back(project_box(d.box, Space::original(), ctx), d.score, d.category, frame.scale_index,
                             frame.id);
    }
    const auto in_range = filter_valid_range(projected, config.valid_ranges[frame.scale_index - 1]);
    pooled.insert(pooled.end(), in_range.begin(), in_range.end());
  }
  return soft_nms(pooled, params);
}

}  // namespace autofocus
