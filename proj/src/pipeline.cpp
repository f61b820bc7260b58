#include "autofocus/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <string>
#include <tuple>

namespace autofocus {

void Scene::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image " + std::to_string(image_id) + " has non-positive size");
  }
  for (const auto& obj : objects) {
    require_same_space(obj.box.space(), Space::original());
    if (obj.box.x() < 0 || obj.box.y() < 0 || obj.box.right() > width || obj.box.bottom() > height) {
      throw std::invalid_argument("object outside image " + std::to_string(image_id));
    }
  }
}

std::int64_t PixelReport::total_raw() const {
  std::int64_t n = 0;
  for (const auto& s : scales) n += s.raw_pixels;
  return n;
}

std::int64_t PixelReport::total_padded() const {
  std::int64_t n = 0;
  for (const auto& s : scales) n += s.padded_pixels;
  return n;
}

std::int64_t PixelReport::total_chips() const {
  std::int64_t n = 0;
  for (const auto& s : scales) n += s.chip_count;
  return n;
}

std::int64_t PixelReport::baseline_pixels() const {
  std::int64_t n = 0;
  for (const auto& s : scales) n += s.baseline_pixels;
  return n;
}

double PixelReport::speedup() const {
  const auto raw = total_raw();
  return raw == 0 ? 0.0 : double(baseline_pixels()) / double(raw);
}

PixelReport& PixelReport::operator+=(const PixelReport& other) {
  for (const auto& s : other.scales) {
    auto it = std::find_if(scales.begin(), scales.end(), [&](const ScaleCost& c) { return c.scale_index == s.scale_index; });
    if (it == scales.end()) {
      scales.push_back(s);
    } else {
      it->raw_pixels += s.raw_pixels;
      it->padded_pixels += s.padded_pixels;
      it->chip_count += s.chip_count;
      it->baseline_pixels += s.baseline_pixels;
    }
  }
  std::sort(scales.begin(), scales.end(), [](auto& a, auto& b) { return a.scale_index < b.scale_index; });
  images += other.images;
  return *this;
}

int aspect_class(double w, double h, int buckets) {
  if (buckets <= 1) return 0;
  const double l = std::clamp(std::log2(w / h), -2.0, 2.0);
  return std::min(buckets - 1, static_cast<int>(std::floor((l + 2.0) / 4.0 * buckets)));
}

Batching group_chips(std::span<const BoxPx> chips, int size_quantum, int aspect_buckets) {
  if (size_quantum < 1) throw std::invalid_argument("size quantum must be >= 1");
  const auto round_up = [&](double v) {
    const auto px = static_cast<std::int64_t>(std::ceil(v - 1e-9));
    return static_cast<int>((px + size_quantum - 1) / size_quantum * size_quantum);
  };
  std::map<std::tuple<int, int, int>, ChipGroup> by_key;
  Batching out;
  for (std::size_t i = 0; i < chips.size(); ++i) {
    const auto& c = chips[i];
    const int cls = aspect_class(c.w(), c.h(), aspect_buckets);
    const int pw = round_up(c.w());
    const int ph = round_up(c.h());
    auto& g = by_key[{cls, pw, ph}];
    g.aspect_class = cls;
    g.padded_w = pw;
    g.padded_h = ph;
    g.members.push_back(i);
    out.raw_pixels += static_cast<std::int64_t>(std::llround(c.w() * c.h()));
    out.padded_pixels += std::int64_t(pw) * ph;
  }
  for (auto& [key, g] : by_key) out.groups.push_back(std::move(g));
  return out;
}

ProbMap stitch_focus_maps(std::span<const ProbMap> maps, std::span<const ChipFrame> frames, int scale_w,
                          int scale_h, int stride) {
  if (maps.size() != frames.size()) throw std::invalid_argument("one focus map per region required");
  const int cols = ceil_div(scale_w, stride);
  const int rows = ceil_div(scale_h, stride);
  ProbMap out(cols, rows, 0.0f);
  Grid<std::uint8_t> owner(cols, rows, 0);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    const int c0 = static_cast<int>(std::lround(frames[i].x0 / stride));
    const int r0 = static_cast<int>(std::lround(frames[i].y0 / stride));
    for (int r = 0; r < m.height(); ++r) {
      const int rr = r0 + r;
      if (rr < 0 || rr >= rows) continue;
      for (int c = 0; c < m.width(); ++c) {
        const int cc = c0 + c;
        if (cc < 0 || cc >= cols) continue;
        if (owner.at(cc, rr)) {
          throw std::invalid_argument("regions " + std::to_string(frames[i].id) + " and another overlap at cell (" +
                                      std::to_string(cc) + "," + std::to_string(rr) + ")");
        }
        owner.at(cc, rr) = 1;
        out.at(cc, rr) = m.at(c, r);
      }
    }
  }
  return out;
}

const ChipParams& CascadeParams::chip_params(int producing_scale) const {
  if (chips.empty()) throw std::invalid_argument("no chip parameters configured");
  if (chips.size() == 1) return chips.front();
  if (producing_scale < 1 || producing_scale > static_cast<int>(chips.size())) {
    throw std::invalid_argument("no chip parameters for scale " + std::to_string(producing_scale));
  }
  return chips[producing_scale - 1];
}

void CascadeParams::validate() const {
  pyramid.validate();
  stack.validate();
  if (chips.empty()) throw std::invalid_argument("no chip parameters configured");
  for (const auto& c : chips) c.validate();
  if (grouping.size_quantum < 1) throw std::invalid_argument("size quantum must be >= 1");
}

std::vector<ScaleGeometry> pyramid_geometry(const PyramidConfig& config, int image_w, int image_h) {
  std::vector<ScaleGeometry> geo;
  for (const auto& spec : config.scales) {
    const double z = resize_factor(spec, image_w, image_h);
    const auto dims = resized_dims(image_w, image_h, z);
    geo.push_back({spec.index, z, double(dims.width), double(dims.height)});
  }
  return geo;
}

std::vector<ChipFrame> frames_for_next_scale(std::span<const FocusChip> chips, const ScaleGeometry& from,
                                             const ScaleGeometry& to, int stride, int next_id) {
  const double s = stride;
  std::vector<FocusChip> snapped;
  for (const auto& chip : chips) {
    require_same_space(chip.rect.space(), Space::scaled(from.index));
    const double x0 = std::max(0.0, std::floor(chip.rect.x() / from.zoom * to.zoom / s) * s);
    const double y0 = std::max(0.0, std::floor(chip.rect.y() / from.zoom * to.zoom / s) * s);
    const double x1 = std::min(std::ceil(chip.rect.right() / from.zoom * to.zoom / s) * s, to.width);
    const double y1 = std::min(std::ceil(chip.rect.bottom() / from.zoom * to.zoom / s) * s, to.height);
    if (x1 <= x0 || y1 <= y0) continue;
    snapped.push_back({BoxPx(x0, y0, x1 - x0, y1 - y0, Space::scaled(to.index)), from.index, chip.id});
  }
  std::vector<ChipFrame> frames;
  for (const auto& chip : merge_chips(snapped)) {
    frames.push_back({next_id++, to.index, to.zoom, chip.rect.x(), chip.rect.y(), chip.rect.w(), chip.rect.h()});
  }
  return frames;
}

namespace {

struct ScaleOutputs {
  std::vector<DetectorOutput> outputs;
};

ScaleOutputs run_regions(const Scene& scene, const Detector& detector, std::span<const ChipFrame> frames, int stride,
                         bool want_focus) {
  ScaleOutputs res;
  res.outputs.resize(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  const auto n = static_cast<std::ptrdiff_t>(frames.size());
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      res.outputs[i] = detector.detect(scene, frames[i], stride, want_focus);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& frame = frames[i];
    const auto& out = res.outputs[i];
    for (const auto& d : out.detections) {
      if (!(d.box.space() == Space::chip(frame.id))) {
        throw ContractViolation("detector returned " + d.box.space().str() + " detections for region " +
                                std::to_string(frame.id));
      }
    }
    if (want_focus) {
      const int w = static_cast<int>(std::ceil(frame.width - 1e-9));
      const int h = static_cast<int>(std::ceil(frame.height - 1e-9));
      if (!out.focus || out.focus->width() != ceil_div(w, stride) || out.focus->height() != ceil_div(h, stride)) {
        throw ContractViolation("detector focus map has wrong dimensions for region " + std::to_string(frame.id));
      }
    }
  }
  return res;
}

CascadeResult run_levels(const Scene& scene, const Detector& detector, const CascadeParams& params, bool full) {
  params.validate();
  scene.validate();
  const auto& cfg = params.pyramid;
  const int stride = cfg.stride;

  CascadeResult result;
  result.geometry = pyramid_geometry(cfg, scene.width, scene.height);
  result.report.images = 1;
  for (const auto& g : result.geometry) {
    result.report.scales.push_back(
        {g.index, 0, 0, 0, static_cast<std::int64_t>(g.width) * static_cast<std::int64_t>(g.height)});
  }
  const auto full_frame = [&](int id, const ScaleGeometry& g) {
    return ChipFrame{id, g.index, g.zoom, 0, 0, g.width, g.height};
  };

  const auto n_scales = static_cast<int>(result.geometry.size());
  int next_id = 0;
  std::vector<ChipFrame> frames = {full_frame(next_id++, result.geometry.front())};
  for (int i = 1; i <= n_scales; ++i) {
    if (frames.empty()) break;
    const ScaleGeometry& geo = result.geometry[i - 1];
    const bool want_focus = !full && i < n_scales;
    auto outs = run_regions(scene, detector, frames, stride, want_focus);

    auto& cost = result.report.scales[i - 1];
    std::vector<BoxPx> rects;
    for (const auto& f : frames) rects.push_back(f.scaled_rect());
    const Batching batching = group_chips(rects, params.grouping.size_quantum, params.grouping.aspect_buckets);
    cost.raw_pixels = batching.raw_pixels;
    cost.padded_pixels = batching.padded_pixels;
    cost.chip_count = static_cast<std::int64_t>(frames.size());

    std::vector<ProbMap> maps;
    for (std::size_t j = 0; j < frames.size(); ++j) {
      result.regions.push_back({frames[j], std::move(outs.outputs[j].detections)});
      if (want_focus) maps.push_back(std::move(*outs.outputs[j].focus));
    }
    if (i == n_scales) break;

    if (full) {
      frames = {full_frame(next_id++, result.geometry[i])};
      continue;
    }
    const ProbMap stitched = stitch_focus_maps(maps, frames, static_cast<int>(geo.width),
                                               static_cast<int>(geo.height), stride);
    const ScaleGeometry& next = result.geometry[i];
    ChipParams cp = params.chip_params(i);
    // Minimum side is given at the processing scale; express it in this scale's pixels.
    cp.k = std::max(1.0, cp.k * geo.zoom / next.zoom);
    auto chips = generate_chips(stitched, cp, static_cast<int>(geo.width), static_cast<int>(geo.height), stride, i);
    frames = frames_for_next_scale(chips, geo, next, stride, next_id);
    next_id += static_cast<int>(frames.size());
    result.focus_chips.push_back(std::move(chips));
  }

  result.detections = focus_stack(result.geometry, result.regions, cfg, params.stack);
  return result;
}

}  // namespace

CascadeResult run_cascade(const Scene& scene, const Detector& detector, const CascadeParams& params) {
  return run_levels(scene, detector, params, false);
}

CascadeResult run_full_pyramid(const Scene& scene, const Detector& detector, const CascadeParams& params) {
  return run_levels(scene, detector, params, true);
}

}  // namespace autofocus
