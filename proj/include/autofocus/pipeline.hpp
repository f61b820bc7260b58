#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "autofocus/chipgen.hpp"
#include "autofocus/geometry.hpp"
#include "autofocus/grid.hpp"
#include "autofocus/stacker.hpp"

namespace autofocus {

struct SceneObject {
  BoxPx box;  // original-image pixels
  int category = 1;
};

struct Scene {
  std::int64_t image_id = 0;
  int width = 0;
  int height = 0;
  std::vector<SceneObject> objects;

  void validate() const;
};

struct DetectorOutput {
  std::vector<Detection> detections;  // chip-local to the region's id
  std::optional<ProbMap> focus;       // ceil(region dims / stride), only when requested
};

// Anything that can look at a region of a scene at a given zoom: returns
// chip-local detections and, on request, a FocusPixel probability map.
// Implementations must be deterministic and safe to call concurrently.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectorOutput detect(const Scene& scene, const ChipFrame& region, int stride, bool want_focus) const = 0;
};

class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScaleCost {
  int scale_index = 1;
  std::int64_t raw_pixels = 0;
  std::int64_t padded_pixels = 0;
  std::int64_t chip_count = 0;
  std::int64_t baseline_pixels = 0;

  friend bool operator==(const ScaleCost&, const ScaleCost&) = default;
};

// Pixels processed per scale. Summing reports is associative and
// order-independent, so per-image reports can be reduced in any order.
struct PixelReport {
  std::vector<ScaleCost> scales;
  std::int64_t images = 0;

  std::int64_t total_raw() const;
  std::int64_t total_padded() const;
  std::int64_t total_chips() const;
  std::int64_t baseline_pixels() const;
  double speedup() const;  // baseline / raw

  PixelReport& operator+=(const PixelReport& other);
  friend bool operator==(const PixelReport&, const PixelReport&) = default;
};

struct GroupingParams {
  int size_quantum = 64;
  int aspect_buckets = 3;
};

struct ChipGroup {
  int aspect_class = 0;
  int padded_w = 0;
  int padded_h = 0;
  std::vector<std::size_t> members;  // indices into the input
};

struct Batching {
  std::vector<ChipGroup> groups;
  std::int64_t raw_pixels = 0;
  std::int64_t padded_pixels = 0;
};

// Aspect class of w/h: log2 aspect clamped to [-2, 2] split into `buckets` bins.
int aspect_class(double w, double h, int buckets);

// Buckets chips by (aspect class, dims rounded up to the quantum). Only the
// padded pixel count depends on this; detections never do.
Batching group_chips(std::span<const BoxPx> chips, int size_quantum, int aspect_buckets);

// Pastes per-region maps into a zero map covering the whole scale. Region
// origins snap to the nearest cell; overlapping regions are an error.
ProbMap stitch_focus_maps(std::span<const ProbMap> maps, std::span<const ChipFrame> frames, int scale_w,
                          int scale_h, int stride);

struct CascadeParams {
  PyramidConfig pyramid = PyramidConfig::defaults();
  // Indexed by producing scale (1..n-1). A single entry applies to every scale.
  // k is the minimum chip side at the scale that processes the chip.
  std::vector<ChipParams> chips = {ChipParams{}};
  StackParams stack;
  GroupingParams grouping;

  const ChipParams& chip_params(int producing_scale) const;
  void validate() const;
};

struct CascadeResult {
  std::vector<Detection> detections;  // original space
  PixelReport report;
  std::vector<ScaleGeometry> geometry;
  std::vector<ChipDetections> regions;                // every processed region with its raw detections
  std::vector<std::vector<FocusChip>> focus_chips;    // per producing scale
};

std::vector<ScaleGeometry> pyramid_geometry(const PyramidConfig& config, int image_w, int image_h);

// Map chips from scale `from` onto the stride grid of scale `to`, merging any
// that overlap after snapping. Frame ids start at `next_id`.
std::vector<ChipFrame> frames_for_next_scale(std::span<const FocusChip> chips, const ScaleGeometry& from,
                                             const ScaleGeometry& to, int stride, int next_id);

// Coarse-to-fine: the full image at scale 1, then only the regions selected
// by the previous scale's focus map. An empty selection ends the cascade.
CascadeResult run_cascade(const Scene& scene, const Detector& detector, const CascadeParams& params);

// Every scale processes the full image; the baseline the cascade is judged against.
CascadeResult run_full_pyramid(const Scene& scene, const Detector& detector, const CascadeParams& params);

}  // namespace autofocus
