#include "autofocus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace autofocus {

void OracleNoise::validate() const {
  if (!(miss_rate >= 0 && miss_rate <= 1)) throw std::invalid_argument("miss rate must lie in [0,1]");
  if (!(false_positive_rate >= 0)) throw std::invalid_argument("false positive rate must be >= 0");
  if (!(jitter_px >= 0)) throw std::invalid_argument("jitter must be >= 0");
  if (!(map_noise_sd >= 0)) throw std::invalid_argument("map noise sd must be >= 0");
}

namespace {

std::mt19937_64 region_rng(std::uint64_t seed, const Scene& scene, const ChipFrame& region) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scene.image_id), static_cast<std::uint32_t>(region.scale_index),
                    static_cast<std::uint32_t>(std::llround(region.x0)),
                    static_cast<std::uint32_t>(std::llround(region.y0)),
                    static_cast<std::uint32_t>(std::llround(region.width)),
                    static_cast<std::uint32_t>(std::llround(region.height))};
  return std::mt19937_64(seq);
}

}  // namespace

DetectorOutput oracle_detect(const Scene& scene, const ChipFrame& region, int stride, const OracleNoise& noise,
                             const LabelParams& labels, bool want_focus) {
  noise.validate();
  if (region.x0 < -1e-6 || region.y0 < -1e-6 || !(region.width > 0) || !(region.height > 0)) {
    throw std::invalid_argument("oracle region is degenerate or starts outside the scene");
  }
  const Space local = Space::chip(region.id);
  const double z = region.zoom;
  const bool noisy = !noise.noise_free();
  std::mt19937_64 rng = region_rng(noise.seed, scene, region);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<BoxPx> scaled;
  scaled.reserve(scene.objects.size());
  DetectorOutput out;
  for (const auto& obj : scene.objects) {
    const BoxPx& b = obj.box;
    BoxPx in_chip(b.x() * z - region.x0, b.y() * z - region.y0, b.w() * z, b.h() * z, local);
    scaled.push_back(in_chip);

    double score = 1.0;
    if (noisy) {
      // Draw everything up front so the stream does not depend on the outcome.
      const double drop = unit(rng);
      const double jx0 = (2 * unit(rng) - 1) * noise.jitter_px;
      const double jy0 = (2 * unit(rng) - 1) * noise.jitter_px;
      const double jx1 = (2 * unit(rng) - 1) * noise.jitter_px;
      const double jy1 = (2 * unit(rng) - 1) * noise.jitter_px;
      score = 0.5 + 0.5 * unit(rng);
      if (drop < noise.miss_rate) continue;
      const double x0 = in_chip.x() + jx0;
      const double y0 = in_chip.y() + jy0;
      const double x1 = std::max(in_chip.right() + jx1, x0 + 1e-3);
      const double y1 = std::max(in_chip.bottom() + jy1, y0 + 1e-3);
      in_chip = BoxPx(x0, y0, x1 - x0, y1 - y0, local);
    }
    if (auto clipped = clip_to(in_chip, region.width, region.height)) {
      out.detections.emplace_back(*clipped, score, obj.category, region.scale_index, region.id);
    }
  }

  if (noise.false_positive_rate > 0) {
    const double mpx = region.width * region.height / 1e6;
    std::poisson_distribution<int> count(noise.false_positive_rate * mpx);
    const int n = count(rng);
    int max_cat = 1;
    for (const auto& obj : scene.objects) max_cat = std::max(max_cat, obj.category);
    for (int i = 0; i < n; ++i) {
      const double side = labels.a + unit(rng) * (labels.b - labels.a);
      const double aspect = std::exp((2 * unit(rng) - 1) * std::log(2.0));
      const double w = std::min(side * std::sqrt(aspect), region.width);
      const double h = std::min(side / std::sqrt(aspect), region.height);
      const double x = unit(rng) * (region.width - w);
      const double y = unit(rng) * (region.height - h);
      const double score = 0.05 + 0.7 * unit(rng);
      const int cat = 1 + static_cast<int>(unit(rng) * max_cat) % max_cat;
      out.detections.emplace_back(BoxPx(x, y, w, h, local), score, cat, region.scale_index, region.id);
    }
  }

  if (want_focus) {
    LabelParams lp = labels;
    lp.stride = stride;
    const int w = static_cast<int>(std::ceil(region.width - 1e-9));
    const int h = static_cast<int>(std::ceil(region.height - 1e-9));
    const LabelMap lm = assign_labels(scaled, w, h, lp, local);
    ProbMap focus(lm.width(), lm.height(), 0.0f);
    auto dst = focus.cells();
    const auto src = lm.cells();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0 ? 1.0f : 0.0f;
    if (noise.map_noise_sd > 0) {
      std::normal_distribution<double> gauss(0.0, noise.map_noise_sd);
      for (auto& v : dst) v = static_cast<float>(std::clamp(double(v) + gauss(rng), 0.0, 1.0));
    }
    out.focus = std::move(focus);
  }
  return out;
}

Scene synth_scene(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("scene size must be positive");
  if (spec.categories < 1) throw std::invalid_argument("need at least one category");
  if (!(spec.max_aspect >= 1)) throw std::invalid_argument("max aspect must be >= 1");
  for (const auto* cls : {&spec.small, &spec.medium, &spec.large}) {
    if (cls->count < 0 || !(cls->min_side > 0) || cls->min_side > cls->max_side) {
      throw std::invalid_argument("bad size class in scene spec");
    }
  }

  Scene scene;
  scene.image_id = spec.image_id;
  scene.width = spec.width;
  scene.height = spec.height;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_aspect = std::log(spec.max_aspect);

  for (const auto* cls : {&spec.large, &spec.medium, &spec.small}) {
    for (int n = 0; n < cls->count; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
        const double side = cls->min_side + unit(rng) * (cls->max_side - cls->min_side);
        const double aspect = std::exp((2 * unit(rng) - 1) * log_aspect);
        const double w = side * std::sqrt(aspect);
        const double h = side / std::sqrt(aspect);
        const double ux = unit(rng);
        const double uy = unit(rng);
        const double uc = unit(rng);
        if (w > spec.width || h > spec.height) continue;
        const BoxPx box(ux * (spec.width - w), uy * (spec.height - h), w, h);
        if (!spec.allow_overlap) {
          const bool clash = std::any_of(scene.objects.begin(), scene.objects.end(),
                                         [&](const SceneObject& o) { return intersection_area(o.box, box) > 0; });
          if (clash) continue;
        }
        const int category = 1 + std::min(spec.categories - 1, static_cast<int>(uc * spec.categories));
        scene.objects.push_back({box, category});
        placed = true;
      }
      if (!placed) {
        throw InfeasibleScene("could not place object " + std::to_string(scene.objects.size() + 1) + " in " +
                              std::to_string(spec.width) + "x" + std::to_string(spec.height) + " scene after " +
                              std::to_string(spec.max_attempts) + " attempts");
      }
    }
  }
  return scene;
}

double area_coverage(const Scene& scene, double lo, double hi) {
  double covered = 0;
  for (const auto& obj : scene.objects) {
    const double s = obj.box.sqrt_area();
    if (s >= lo && s < hi) covered += obj.box.area();
  }
  return covered / (double(scene.width) * double(scene.height));
}

}  // namespace autofocus
