#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace autofocus {

// Coordinate frames a box can live in. The index is the scale ordinal for
// ScaledImage/FeatureMap and the chip id for ChipLocal; unused for Original.
enum class SpaceKind : std::uint8_t { Original, ScaledImage, FeatureMap, ChipLocal };

struct Space {
  SpaceKind kind = SpaceKind::Original;
  int index = 0;

  static constexpr Space original() { return {SpaceKind::Original, 0}; }
  static constexpr Space scaled(int scale) { return {SpaceKind::ScaledImage, scale}; }
  static constexpr Space feature(int scale) { return {SpaceKind::FeatureMap, scale}; }
  static constexpr Space chip(int chip_id) { return {SpaceKind::ChipLocal, chip_id}; }

  friend constexpr bool operator==(const Space&, const Space&) = default;

  // "original", "scaled-image:2", "feature-map:1", "chip-local:7"
  std::string str() const;
  static Space parse(const std::string& text);
};

class SpaceMismatch : public std::logic_error {
 public:
  SpaceMismatch(const Space& a, const Space& b);
};

void require_same_space(const Space& a, const Space& b);

// Axis-aligned rectangle with strictly positive extent, tagged with the frame
// its coordinates refer to.
class BoxPx {
 public:
  BoxPx(double x, double y, double w, double h, Space space = Space::original());

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double right() const { return x_ + w_; }
  double bottom() const { return y_ + h_; }
  double area() const { return w_ * h_; }
  double sqrt_area() const;
  const Space& space() const { return space_; }

  BoxPx with_space(Space space) const { return {x_, y_, w_, h_, space}; }

  friend bool operator==(const BoxPx&, const BoxPx&) = default;

 private:
  double x_, y_, w_, h_;
  Space space_;
};

// Lexicographic order on (x, y, w, h); used for deterministic tie-breaks.
bool box_less(const BoxPx& a, const BoxPx& b);

double intersection_area(const BoxPx& a, const BoxPx& b);
std::optional<BoxPx> intersection(const BoxPx& a, const BoxPx& b);
BoxPx enclosing(const BoxPx& a, const BoxPx& b);
bool contains(const BoxPx& outer, const BoxPx& inner);
double iou(const BoxPx& a, const BoxPx& b);

// Clip to [0, w) x [0, h) in the box's own frame. Empty when nothing remains.
std::optional<BoxPx> clip_to(const BoxPx& box, double w, double h);

struct ScaleSpec {
  double min_side = 0;
  double max_side = 0;
  int index = 1;

  ScaleSpec() = default;
  ScaleSpec(double min_side, double max_side, int index);
};

// Closed interval on sqrt(detection area) in original-image pixels.
struct ValidRange {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double sqrt_area) const { return lo <= sqrt_area && sqrt_area <= hi; }
};

struct PyramidConfig {
  std::vector<ScaleSpec> scales;
  int stride = 16;
  std::vector<ValidRange> valid_ranges;  // one per scale

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  // S1=(480,512), S2=(800,1280), S3=(1400,2000), stride 16, ranges
  // [90,inf) / [30,160] / [0,90].
  static PyramidConfig defaults();
};

struct Detection {
  BoxPx box;
  double score = 0;
  int category = 0;
  int scale_index = 1;
  std::optional<int> chip_id;

  Detection(BoxPx box, double score, int category, int scale_index = 1,
            std::optional<int> chip_id = std::nullopt);
};

// Zoom applied to an image of the given size so the shorter side reaches
// min_side unless that pushes the longer side past max_side.
double resize_factor(const ScaleSpec& spec, double image_w, double image_h);

struct ScaledDims {
  int width = 0;
  int height = 0;
};

// Rounded (half-up) dimensions of the resized image.
ScaledDims resized_dims(double image_w, double image_h, double zoom);

// A region processed at one scale. Origin and extent are in scaled-image
// pixels of that scale, so chip-local coordinates are a pure translation.
struct ChipFrame {
  int id = 0;
  int scale_index = 1;
  double zoom = 1;
  double x0 = 0;
  double y0 = 0;
  double width = 0;
  double height = 0;

  static ChipFrame from_original_origin(int id, int scale_index, double zoom, double ox, double oy,
                                        double width, double height);

  BoxPx scaled_rect() const { return {x0, y0, width, height, Space::scaled(scale_index)}; }
  BoxPx original_rect() const;
};

struct ProjectionContext {
  std::vector<double> zooms;  // zooms[i - 1] for scale i
  double stride = 16;
  std::vector<ChipFrame> chips;

  double zoom(int scale_index) const;
  const ChipFrame& chip(int chip_id) const;
};

class ProjectionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Re-express a box in another frame, routing through original coordinates.
BoxPx project_box(const BoxPx& box, const Space& to, const ProjectionContext& ctx);

}  // namespace autofocus
