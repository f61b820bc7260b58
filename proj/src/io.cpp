#include "autofocus/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>

namespace autofocus {

double round6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot open " + path.string() + " for writing");
  f << doc.dump(2) << '\n';
  if (!f) throw InputError("write failed for " + path.string());
}

namespace {

Json box_json(const BoxPx& b) { return Json::array({round6(b.x()), round6(b.y()), round6(b.w()), round6(b.h())}); }

// Reads [x, y, w, h]; returns false when the array is malformed.
bool box_fields(const Json& j, double out[4]) {
  if (!j.is_array() || j.size() != 4) return false;
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) return false;
    out[i] = j[i].get<double>();
  }
  return true;
}

template <typename T>
T field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw InputError(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
void maybe(const Json& obj, const char* key, T& target) {
  if (obj.is_object() && obj.contains(key) && !obj.at(key).is_null()) target = obj.at(key).get<T>();
}

double json_bound(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

AnnotationSet parse_annotations(const Json& doc) {
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw InputError("annotation file needs an 'images' array");
  }
  AnnotationSet set;
  std::map<std::int64_t, std::size_t> by_id;
  for (const auto& im : doc["images"]) {
    Scene s;
    s.image_id = field<std::int64_t>(im, "id", "image");
    const std::string where = "image " + std::to_string(s.image_id);
    s.width = static_cast<int>(std::lround(field<double>(im, "width", where)));
    s.height = static_cast<int>(std::lround(field<double>(im, "height", where)));
    if (s.width <= 0 || s.height <= 0) throw InputError(where + ": non-positive size");
    if (!by_id.emplace(s.image_id, set.scenes.size()).second) {
      throw InputError("duplicate image id " + std::to_string(s.image_id));
    }
    set.scenes.push_back(std::move(s));
  }

  if (doc.contains("annotations")) {
    std::set<std::int64_t> ann_ids;
    for (const auto& ann : doc["annotations"]) {
      const auto id = field<std::int64_t>(ann, "id", "annotation");
      const std::string where = "annotation " + std::to_string(id);
      if (!ann_ids.insert(id).second) throw InputError("duplicate annotation id " + std::to_string(id));
      const auto image_id = field<std::int64_t>(ann, "image_id", where);
      const auto it = by_id.find(image_id);
      if (it == by_id.end()) {
        throw InputError(where + " references unknown image_id " + std::to_string(image_id));
      }
      double bb[4];
      if (!ann.contains("bbox") || !box_fields(ann["bbox"], bb)) throw InputError(where + ": bbox must be [x,y,w,h]");
      if (!(bb[2] > 0) || !(bb[3] > 0)) throw InputError(where + ": malformed bbox (non-positive width or height)");
      Scene& scene = set.scenes[it->second];
      const auto clipped = clip_to(BoxPx(bb[0], bb[1], bb[2], bb[3]), scene.width, scene.height);
      if (!clipped) throw InputError(where + ": bbox lies outside image " + std::to_string(image_id));
      scene.objects.push_back({*clipped, field<int>(ann, "category_id", where)});
    }
  }

  if (doc.contains("categories")) {
    for (const auto& c : doc["categories"]) {
      const int id = field<int>(c, "id", "category");
      std::string name = std::to_string(id);
      maybe(c, "name", name);
      if (!set.categories.emplace(id, name).second) throw InputError("duplicate category id " + std::to_string(id));
    }
  }
  return set;
}

AnnotationSet read_annotations(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  try {
    return parse_annotations(doc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Json annotations_to_json(const AnnotationSet& set) {
  Json images = Json::array();
  Json anns = Json::array();
  std::int64_t next = 1;
  std::set<int> used_categories;
  for (const auto& s : set.scenes) {
    images.push_back({{"id", s.image_id}, {"width", s.width}, {"height", s.height}});
    for (const auto& o : s.objects) {
      anns.push_back({{"id", next++},
                      {"image_id", s.image_id},
                      {"bbox", box_json(o.box)},
                      {"area", round6(o.box.area())},
                      {"category_id", o.category}});
      used_categories.insert(o.category);
    }
  }
  Json cats = Json::array();
  std::map<int, std::string> names = set.categories;
  for (const int c : used_categories) names.emplace(c, "class" + std::to_string(c));
  for (const auto& [id, name] : names) cats.push_back({{"id", id}, {"name", name}});
  return {{"images", images}, {"annotations", anns}, {"categories", cats}};
}

Json chips_to_json(const std::vector<ChipRecord>& chips) {
  Json arr = Json::array();
  for (const auto& r : chips) {
    arr.push_back({{"image_id", r.image_id},
                   {"id", r.chip.id},
                   {"source_scale", r.chip.source_scale},
                   {"space", r.chip.rect.space().str()},
                   {"rect", box_json(r.chip.rect)}});
  }
  return {{"chips", arr}};
}

std::vector<ChipRecord> parse_chips(const Json& doc) {
  if (!doc.is_object() || !doc.contains("chips") || !doc["chips"].is_array()) {
    throw InputError("chips file needs a 'chips' array");
  }
  std::vector<ChipRecord> out;
  for (const auto& c : doc["chips"]) {
    const int id = field<int>(c, "id", "chip");
    const std::string where = "chip " + std::to_string(id);
    double bb[4];
    if (!c.contains("rect") || !box_fields(c["rect"], bb)) throw InputError(where + ": rect must be [x,y,w,h]");
    const int scale = field<int>(c, "source_scale", where);
    Space space = Space::scaled(scale);
    if (c.contains("space")) space = Space::parse(c["space"].get<std::string>());
    try {
      out.push_back({field<std::int64_t>(c, "image_id", where), {BoxPx(bb[0], bb[1], bb[2], bb[3], space), scale, id}});
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return out;
}

Json detections_to_json(const std::vector<ImageDetections>& images) {
  Json arr = Json::array();
  for (const auto& im : images) {
    for (const auto& d : im.detections) {
      Json rec = {{"image_id", im.image_id},
                  {"bbox", box_json(d.box)},
                  {"score", round6(d.score)},
                  {"category_id", d.category},
                  {"scale_index", d.scale_index},
                  {"space", d.box.space().str()}};
      if (d.chip_id) rec["chip_id"] = *d.chip_id;
      arr.push_back(std::move(rec));
    }
  }
  return {{"detections", arr}};
}

std::vector<ImageDetections> parse_detections(const Json& doc) {
  const Json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("detections")) throw InputError("detections file needs a 'detections' array");
    arr = &doc["detections"];
  }
  if (!arr->is_array()) throw InputError("detections must be an array");
  std::vector<ImageDetections> out;
  std::map<std::int64_t, std::size_t> index;
  std::size_t n = 0;
  for (const auto& r : *arr) {
    const std::string where = "detection #" + std::to_string(n++);
    const auto image_id = field<std::int64_t>(r, "image_id", where);
    double bb[4];
    if (!r.contains("bbox") || !box_fields(r["bbox"], bb)) throw InputError(where + ": bbox must be [x,y,w,h]");
    Space space = Space::original();
    if (r.contains("space")) space = Space::parse(r["space"].get<std::string>());
    int scale = 1;
    maybe(r, "scale_index", scale);
    std::optional<int> chip;
    if (r.contains("chip_id") && !r["chip_id"].is_null()) chip = r["chip_id"].get<int>();
    try {
      Detection det(BoxPx(bb[0], bb[1], bb[2], bb[3], space), field<double>(r, "score", where),
                    field<int>(r, "category_id", where), scale, chip);
      auto [it, fresh] = index.emplace(image_id, out.size());
      if (fresh) out.push_back({image_id, {}});
      out[it->second].detections.push_back(det);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return out;
}

Json geometry_to_json(const std::vector<ImageGeometry>& images) {
  Json arr = Json::array();
  for (const auto& g : images) {
    Json scales = Json::array();
    for (const auto& s : g.scales) {
      const double z = resize_factor(s, g.width, g.height);
      const auto dims = resized_dims(g.width, g.height, z);
      scales.push_back({{"index", s.index},
                        {"min_side", round6(s.min_side)},
                        {"max_side", round6(s.max_side)},
                        {"zoom", round6(z)},
                        {"width", dims.width},
                        {"height", dims.height}});
    }
    arr.push_back({{"image_id", g.image_id}, {"width", g.width}, {"height", g.height}, {"scales", scales}});
  }
  return {{"images", arr}};
}

std::vector<ImageGeometry> parse_geometry(const Json& doc) {
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw InputError("geometry file needs an 'images' array");
  }
  std::vector<ImageGeometry> out;
  for (const auto& im : doc["images"]) {
    ImageGeometry g;
    g.image_id = field<std::int64_t>(im, "image_id", "geometry");
    const std::string where = "geometry of image " + std::to_string(g.image_id);
    g.width = field<int>(im, "width", where);
    g.height = field<int>(im, "height", where);
    if (!im.contains("scales") || !im["scales"].is_array()) throw InputError(where + ": needs 'scales'");
    for (const auto& s : im["scales"]) {
      try {
        g.scales.emplace_back(field<double>(s, "min_side", where), field<double>(s, "max_side", where),
                              field<int>(s, "index", where));
      } catch (const std::invalid_argument& e) {
        throw InputError(where + ": " + e.what());
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

Json report_to_json(const PixelReport& report) {
  Json scales = Json::array();
  for (const auto& s : report.scales) {
    scales.push_back({{"scale_index", s.scale_index},
                      {"raw_pixels", s.raw_pixels},
                      {"padded_pixels", s.padded_pixels},
                      {"chip_count", s.chip_count},
                      {"baseline_pixels", s.baseline_pixels}});
  }
  return {{"images", report.images},
          {"scales", scales},
          {"total_raw_pixels", report.total_raw()},
          {"total_padded_pixels", report.total_padded()},
          {"baseline_pixels", report.baseline_pixels()},
          {"speedup", round6(report.speedup())}};
}

PixelReport parse_report(const Json& doc) {
  PixelReport r;
  r.images = field<std::int64_t>(doc, "images", "report");
  if (!doc.contains("scales") || !doc["scales"].is_array()) throw InputError("report: needs 'scales'");
  for (const auto& s : doc["scales"]) {
    r.scales.push_back({field<int>(s, "scale_index", "report"), field<std::int64_t>(s, "raw_pixels", "report"),
                        field<std::int64_t>(s, "padded_pixels", "report"), field<std::int64_t>(s, "chip_count", "report"),
                        field<std::int64_t>(s, "baseline_pixels", "report")});
  }
  return r;
}

void apply_config(const Json& doc, RunConfig& cfg) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  try {
    if (doc.contains("pyramid")) {
      const auto& p = doc["pyramid"];
      auto& pyr = cfg.cascade.pyramid;
      maybe(p, "stride", pyr.stride);
      if (p.contains("scales")) {
        pyr.scales.clear();
        int idx = 1;
        for (const auto& s : p["scales"]) pyr.scales.emplace_back(s.at(0).get<double>(), s.at(1).get<double>(), idx++);
      }
      if (p.contains("valid_ranges")) {
        pyr.valid_ranges.clear();
        for (const auto& r : p["valid_ranges"]) pyr.valid_ranges.push_back({json_bound(r.at(0)), json_bound(r.at(1))});
      }
    }
    if (doc.contains("chips")) {
      const auto& c = doc["chips"];
      const auto read_one = [](const Json& j) {
        ChipParams cp;
        maybe(j, "t", cp.t);
        maybe(j, "d", cp.d);
        maybe(j, "k", cp.k);
        return cp;
      };
      cfg.cascade.chips.clear();
      if (c.is_array()) {
        for (const auto& j : c) cfg.cascade.chips.push_back(read_one(j));
      } else {
        cfg.cascade.chips.push_back(read_one(c));
      }
    }
    if (doc.contains("stack")) {
      const auto& s = doc["stack"];
      maybe(s, "sigma", cfg.cascade.stack.sigma);
      maybe(s, "score_floor", cfg.cascade.stack.score_floor);
      maybe(s, "boundary_tolerance", cfg.cascade.stack.boundary_tolerance);
    }
    if (doc.contains("grouping")) {
      maybe(doc["grouping"], "size_quantum", cfg.cascade.grouping.size_quantum);
      maybe(doc["grouping"], "aspect_buckets", cfg.cascade.grouping.aspect_buckets);
    }
    if (doc.contains("labels")) {
      maybe(doc["labels"], "a", cfg.labels.a);
      maybe(doc["labels"], "b", cfg.labels.b);
      maybe(doc["labels"], "c", cfg.labels.c);
    }
    if (doc.contains("noise")) {
      const auto& n = doc["noise"];
      maybe(n, "miss_rate", cfg.noise.miss_rate);
      maybe(n, "false_positive_rate", cfg.noise.false_positive_rate);
      maybe(n, "jitter_px", cfg.noise.jitter_px);
      maybe(n, "map_noise_sd", cfg.noise.map_noise_sd);
      maybe(n, "seed", cfg.noise.seed);
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.labels.stride = cfg.cascade.pyramid.stride;
}

}  // namespace autofocus
