#include "autofocus/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace autofocus {

std::string Space::str() const {
  switch (kind) {
    case SpaceKind::Original:
      return "original";
    case SpaceKind::ScaledImage:
      return "scaled-image:" + std::to_string(index);
    case SpaceKind::FeatureMap:
      return "feature-map:" + std::to_string(index);
    case SpaceKind::ChipLocal:
      return "chip-local:" + std::to_string(index);
  }
  return "unknown";
}

Space Space::parse(const std::string& text) {
  if (text == "original") return original();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("unknown coordinate space '" + text + "'");
  const std::string head = text.substr(0, colon);
  int index = 0;
  try {
    std::size_t used = 0;
    index = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad index in coordinate space '" + text + "'");
  }
  if (head == "scaled-image") return scaled(index);
  if (head == "feature-map") return feature(index);
  if (head == "chip-local") return chip(index);
  throw std::invalid_argument("unknown coordinate space '" + text + "'");
}

SpaceMismatch::SpaceMismatch(const Space& a, const Space& b)
    : std::logic_error("coordinate space mismatch: " + a.str() + " vs " + b.str()) {}

void require_same_space(const Space& a, const Space& b) {
  if (!(a == b)) throw SpaceMismatch(a, b);
}

BoxPx::BoxPx(double x, double y, double w, double h, Space space)
    : x_(x), y_(y), w_(w), h_(h), space_(space) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
    throw std::invalid_argument("box coordinates must be finite");
  }
  if (!(w > 0) || !(h > 0)) {
    std::ostringstream msg;
    msg << "box must have positive extent, got w=" << w << " h=" << h;
    throw std::invalid_argument(msg.str());
  }
}

double BoxPx::sqrt_area() const { return std::sqrt(w_ * h_); }

bool box_less(const BoxPx& a, const BoxPx& b) {
  return std::tuple(a.x(), a.y(), a.w(), a.h()) < std::tuple(b.x(), b.y(), b.w(), b.h());
}

double intersection_area(const BoxPx& a, const BoxPx& b) {
  require_same_space(a.space(), b.space());
  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

std::optional<BoxPx> intersection(const BoxPx& a, const BoxPx& b) {
  require_same_space(a.space(), b.space());
  const double x0 = std::max(a.x(), b.x());
  const double y0 = std::max(a.y(), b.y());
  const double x1 = std::min(a.right(), b.right());
  const double y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BoxPx(x0, y0, x1 - x0, y1 - y0, a.space());
}

BoxPx enclosing(const BoxPx& a, const BoxPx& b) {
  require_same_space(a.space(), b.space());
  const double x0 = std::min(a.x(), b.x());
  const double y0 = std::min(a.y(), b.y());
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0, a.space()};
}

bool contains(const BoxPx& outer, const BoxPx& inner) {
  require_same_space(outer.space(), inner.space());
  return outer.x() <= inner.x() && outer.y() <= inner.y() && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

double iou(const BoxPx& a, const BoxPx& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::optional<BoxPx> clip_to(const BoxPx& box, double w, double h) {
  const double x0 = std::max(box.x(), 0.0);
  const double y0 = std::max(box.y(), 0.0);
  const double x1 = std::min(box.right(), w);
  const double y1 = std::min(box.bottom(), h);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  // Untouched sides keep their extent bit for bit; x + w - x is not always w.
  const double cw = (x0 == box.x() && x1 == box.right()) ? box.w() : x1 - x0;
  const double ch = (y0 == box.y() && y1 == box.bottom()) ? box.h() : y1 - y0;
  return BoxPx(x0, y0, cw, ch, box.space());
}

ScaleSpec::ScaleSpec(double min_side, double max_side, int index)
    : min_side(min_side), max_side(max_side), index(index) {
  if (!(min_side > 0) || !(min_side <= max_side)) {
    throw std::invalid_argument("scale spec requires 0 < min_side <= max_side");
  }
}

void PyramidConfig::validate() const {
  if (scales.empty()) throw std::invalid_argument("pyramid needs at least one scale");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (valid_ranges.size() != scales.size()) {
    throw std::invalid_argument("need one valid range per scale");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const auto& s = scales[i];
    if (!(s.min_side > 0) || !(s.min_side <= s.max_side)) {
      throw std::invalid_argument("scale " + std::to_string(i + 1) + ": need 0 < min_side <= max_side");
    }
    if (s.index != static_cast<int>(i) + 1) {
      throw std::invalid_argument("scale indices must be 1..n in order");
    }
    if (i > 0 && !(s.min_side > scales[i - 1].min_side || s.max_side > scales[i - 1].max_side)) {
      throw std::invalid_argument("scales must increase in resolution");
    }
    if (valid_ranges[i].lo > valid_ranges[i].hi) {
      throw std::invalid_argument("scale " + std::to_string(i + 1) + ": valid range lo > hi");
    }
  }
  // Jointly the ranges must cover (0, inf).
  std::vector<ValidRange> sorted = valid_ranges;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
  double reach = 0;
  if (sorted.front().lo > 0) throw std::invalid_argument("valid ranges leave small sizes uncovered");
  for (const auto& r : sorted) {
    if (r.lo > reach) throw std::invalid_argument("valid ranges leave a gap");
    reach = std::max(reach, r.hi);
  }
  if (!std::isinf(reach)) throw std::invalid_argument("valid ranges leave large sizes uncovered");
}

PyramidConfig PyramidConfig::defaults() {
  PyramidConfig cfg;
  cfg.scales = {ScaleSpec(480, 512, 1), ScaleSpec(800, 1280, 2), ScaleSpec(1400, 2000, 3)};
  cfg.stride = 16;
  const double inf = std::numeric_limits<double>::infinity();
  cfg.valid_ranges = {{90, inf}, {30, 160}, {0, 90}};
  return cfg;
}

Detection::Detection(BoxPx box, double score, int category, int scale_index,
                     std::optional<int> chip_id)
    : box(box), score(score), category(category), scale_index(scale_index), chip_id(chip_id) {
  if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("detection score outside [0,1]");
}

double resize_factor(const ScaleSpec& spec, double image_w, double image_h) {
  if (!(image_w > 0) || !(image_h > 0)) throw std::invalid_argument("image dimensions must be positive");
  const double short_side = std::min(image_w, image_h);
  const double long_side = std::max(image_w, image_h);
  return std::min(spec.min_side / short_side, spec.max_side / long_side);
}

ScaledDims resized_dims(double image_w, double image_h, double zoom) {
  return {static_cast<int>(std::floor(image_w * zoom + 0.5)),
          static_cast<int>(std::floor(image_h * zoom + 0.5))};
}

ChipFrame ChipFrame::from_original_origin(int id, int scale_index, double zoom, double ox, double oy,
                                          double width, double height) {
  return {id, scale_index, zoom, ox * zoom, oy * zoom, width, height};
}

BoxPx ChipFrame::original_rect() const {
  return {x0 / zoom, y0 / zoom, width / zoom, height / zoom, Space::original()};
}

double ProjectionContext::zoom(int scale_index) const {
  if (scale_index < 1 || scale_index > static_cast<int>(zooms.size())) {
    throw ProjectionError("no zoom known for scale " + std::to_string(scale_index));
  }
  return zooms[scale_index - 1];
}

const ChipFrame& ProjectionContext::chip(int chip_id) const {
  for (const auto& c : chips) {
    if (c.id == chip_id) return c;
  }
  throw ProjectionError("no geometry known for chip " + std::to_string(chip_id));
}

namespace {

BoxPx to_original(const BoxPx& b, const ProjectionContext& ctx) {
  const Space& s = b.space();
  switch (s.kind) {
    case SpaceKind::Original:
      return b;
    case SpaceKind::ScaledImage: {
      const double z = ctx.zoom(s.index);
      return {b.x() / z, b.y() / z, b.w() / z, b.h() / z};
    }
    case SpaceKind::FeatureMap: {
      const double f = ctx.stride / ctx.zoom(s.index);
      return {b.x() * f, b.y() * f, b.w() * f, b.h() * f};
    }
    case SpaceKind::ChipLocal: {
      const ChipFrame& c = ctx.chip(s.index);
      return {(b.x() + c.x0) / c.zoom, (b.y() + c.y0) / c.zoom, b.w() / c.zoom, b.h() / c.zoom};
    }
  }
  throw ProjectionError("unknown source space " + s.str());
}

BoxPx from_original(const BoxPx& b, const Space& to, const ProjectionContext& ctx) {
  switch (to.kind) {
    case SpaceKind::Original:
      return b;
    case SpaceKind::ScaledImage: {
      const double z = ctx.zoom(to.index);
      return {b.x() * z, b.y() * z, b.w() * z, b.h() * z, to};
    }
    case SpaceKind::FeatureMap: {
      const double f = ctx.zoom(to.index) / ctx.stride;
      return {b.x() * f, b.y() * f, b.w() * f, b.h() * f, to};
    }
    case SpaceKind::ChipLocal: {
      const ChipFrame& c = ctx.chip(to.index);
      return {b.x() * c.zoom - c.x0, b.y() * c.zoom - c.y0, b.w() * c.zoom, b.h() * c.zoom, to};
    }
  }
  throw ProjectionError("unknown target space " + to.str());
}

}  // namespace

BoxPx project_box(const BoxPx& box, const Space& to, const ProjectionContext& ctx) {
  if (box.space() == to) return box;
  return from_original(to_original(box, ctx), to, ctx);
}

}  // namespace autofocus
