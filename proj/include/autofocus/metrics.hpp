#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autofocus/chipgen.hpp"
#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"
#include "autofocus/labeler.hpp"
#include "autofocus/pipeline.hpp"

namespace autofocus {

struct CurvePoint {
  double param = 0;       // swept value (t or k)
  double area_ratio = 0;  // selected area / image area
  double recall = 0;
};

struct RecallResult {
  double recall = 1;
  double area_ratio = 0;
};

// Pixel-level: fraction of +1 label cells predicted above t, and the fraction
// of all cells predicted above t. Recall is 1 when there are no positives.
RecallResult focuspixel_recall(const ProbMap& pred, const LabelMap& gt, double t);

std::vector<CurvePoint> focuspixel_curve(const ProbMap& pred, const LabelMap& gt, std::span<const double> thresholds);

// GTs covered by some detection with IoU > iou_min and score > score_min.
std::vector<BoxPx> confident_subset(std::span<const BoxPx> gts, std::span<const Detection> dets,
                                    double iou_min = 0.5, double score_min = 0.5);

// Box-level: a GT counts when one chip fully encloses it. Chips must not overlap.
RecallResult focuschip_recall(std::span<const FocusChip> chips, std::span<const BoxPx> gts, double image_w,
                              double image_h);

struct SpeedupPoint {
  double k = 0;
  double speedup = 0;
  PixelReport report;
};

// Noise-free oracle cascade per k (same k at every scale), so the focus maps
// are the best possible; speedup = baseline pixels / processed pixels.
std::vector<SpeedupPoint> speedup_bound(std::span<const Scene> scenes, const CascadeParams& base,
                                        const LabelParams& labels, std::span<const double> ks);

struct GroundTruth {
  BoxPx box;
  int category = 1;
};

struct EvalImage {
  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
};

struct APResult {
  std::vector<double> thresholds;
  std::vector<double> ap;  // per threshold, averaged over categories with GT
  double mean = 0;
};

// COCO-style: greedy matching in descending score per category and image,
// IoU >= threshold, 101-point interpolated precision.
APResult average_precision(std::span<const EvalImage> images, std::span<const double> iou_thresholds);
APResult average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           std::span<const double> iou_thresholds);

// 0.50:0.05:0.95
std::vector<double> coco_iou_thresholds();

}  // namespace autofocus
