#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "autofocus/chipgen.hpp"
#include "autofocus/labeler.hpp"
#include "autofocus/oracle.hpp"
#include "autofocus/pipeline.hpp"

namespace autofocus {

using Json = nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rounds to 6 significant digits; every float written to JSON goes through this.
double round6(double v);

Json read_json(const std::filesystem::path& path);
// Two-space indent, trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);

// COCO subset: images (id, width, height), annotations (id, image_id, bbox,
// category_id), categories (id, name). Unknown fields are ignored. Boxes are
// clipped to their image; an empty result is rejected.
struct AnnotationSet {
  std::vector<Scene> scenes;
  std::map<int, std::string> categories;
};
AnnotationSet parse_annotations(const Json& doc);
AnnotationSet read_annotations(const std::filesystem::path& path);
Json annotations_to_json(const AnnotationSet& set);

struct ChipRecord {
  std::int64_t image_id = 0;
  FocusChip chip;
};
Json chips_to_json(const std::vector<ChipRecord>& chips);
std::vector<ChipRecord> parse_chips(const Json& doc);

struct ImageDetections {
  std::int64_t image_id = 0;
  std::vector<Detection> detections;
};
Json detections_to_json(const std::vector<ImageDetections>& images);
std::vector<ImageDetections> parse_detections(const Json& doc);

// Per-image pyramid geometry for the stack subcommand. Zooms are recomputed
// from the stored scale specs and image size so they stay exact.
struct ImageGeometry {
  std::int64_t image_id = 0;
  int width = 0;
  int height = 0;
  std::vector<ScaleSpec> scales;
};
Json geometry_to_json(const std::vector<ImageGeometry>& images);
std::vector<ImageGeometry> parse_geometry(const Json& doc);

Json report_to_json(const PixelReport& report);
PixelReport parse_report(const Json& doc);

// Optional run configuration; absent keys keep the defaults already in place.
struct RunConfig {
  CascadeParams cascade;
  LabelParams labels;
  OracleNoise noise;
};
void apply_config(const Json& doc, RunConfig& cfg);

}  // namespace autofocus
