#pragma once

#include <span>
#include <vector>

#include "autofocus/geometry.hpp"

namespace autofocus {

struct StackParams {
  double sigma = 0.55;              // Gaussian Soft-NMS decay
  double score_floor = 0.001;       // detections decayed below this are dropped
  double boundary_tolerance = 1.0;  // chip-local px

  void validate() const;
};

// Drops detections that sit on a chip border which is not also an image
// border. `chip` is the processed region in scaled-image pixels of an image
// that is image_w x image_h at that scale; detections are chip-local.
std::vector<Detection> prune_boundary_detections(std::span<const Detection> dets, const BoxPx& chip,
                                                 double image_w, double image_h, double tolerance = 1.0);

// Keeps lo <= sqrt(w*h) <= hi.
std::vector<Detection> filter_valid_range(std::span<const Detection> dets, const ValidRange& range);

// Gaussian Soft-NMS within each category. Output sorted by final score
// descending, ties by box (x, y, w, h) then category.
std::vector<Detection> soft_nms(std::span<const Detection> dets, const StackParams& params);

// Scaled-image geometry of one pyramid level.
struct ScaleGeometry {
  int index = 1;
  double zoom = 1;
  double width = 0;
  double height = 0;
};

struct ChipDetections {
  ChipFrame frame;
  std::vector<Detection> detections;  // chip-local to frame.id
};

// Prune chip borders, project to original coordinates, apply each source
// scale's valid range, pool everything and run Soft-NMS.
std::vector<Detection> focus_stack(std::span<const ScaleGeometry> scales, std::span<const ChipDetections> chips,
                                   const PyramidConfig& config, const StackParams& params);

}  // namespace autofocus
