#pragma once

#include <cstdint>

#include "autofocus/labeler.hpp"
#include "autofocus/pipeline.hpp"

namespace autofocus {

struct OracleNoise {
  double miss_rate = 0;            // probability a GT is not reported
  double false_positive_rate = 0;  // expected spurious boxes per megapixel of processed region
  double jitter_px = 0;            // uniform +-jitter on each box edge, chip-local px
  double map_noise_sd = 0;         // additive Gaussian noise on the focus map, clamped to [0,1]
  std::uint64_t seed = 0;

  bool noise_free() const {
    return miss_rate == 0 && false_positive_rate == 0 && jitter_px == 0 && map_noise_sd == 0;
  }
  void validate() const;
};

// Ground-truth detector. Noise-free it reports every GT overlapping the
// region, clipped, with score 1, and a focus map that is 1 exactly on the
// blocks assign_labels marks +1 for the scaled, unclipped GTs. The label
// stride is taken from the call, not from `labels`.
DetectorOutput oracle_detect(const Scene& scene, const ChipFrame& region, int stride, const OracleNoise& noise,
                             const LabelParams& labels, bool want_focus = true);

class OracleDetector final : public Detector {
 public:
  OracleDetector(LabelParams labels = {}, OracleNoise noise = {}) : labels_(labels), noise_(noise) {}

  DetectorOutput detect(const Scene& scene, const ChipFrame& region, int stride, bool want_focus) const override {
    return oracle_detect(scene, region, stride, noise_, labels_, want_focus);
  }

 private:
  LabelParams labels_;
  OracleNoise noise_;
};

// Objects of one size class; sizes are sqrt(area) in original pixels.
struct SizeClass {
  int count = 0;
  double min_side = 0;
  double max_side = 0;
};

struct SceneSpec {
  std::int64_t image_id = 1;
  int width = 640;
  int height = 480;
  SizeClass small{0, 16, 32};
  SizeClass medium{0, 32, 96};
  SizeClass large{0, 96, 256};
  double max_aspect = 2.0;  // w/h drawn log-uniformly in [1/max_aspect, max_aspect]
  int categories = 1;
  bool allow_overlap = false;
  int max_attempts = 2000;  // per object before the scene spec is declared infeasible
  std::uint64_t seed = 0;
};

class InfeasibleScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic in the scene spec (seed included). Large objects are placed first.
Scene synth_scene(const SceneSpec& spec);

// Fraction of the image covered by objects whose sqrt(area) lies in [lo, hi).
double area_coverage(const Scene& scene, double lo, double hi);

}  // namespace autofocus
