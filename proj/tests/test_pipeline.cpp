#include <doctest.h>

#include <cmath>
#include <random>

#include "autofocus/oracle.hpp"
#include "autofocus/pipeline.hpp"
#include "oracles.hpp"

using namespace autofocus;

namespace {

Scene one_object(double x, double y, double w, double h, int width = 640, int height = 480) {
  Scene s;
  s.image_id = 3;
  s.width = width;
  s.height = height;
  s.objects.push_back({BoxPx(x, y, w, h), 1});
  return s;
}

CascadeParams two_scale_params(double k) {
  CascadeParams p;
  p.pyramid.scales = {ScaleSpec(500, 500, 1), ScaleSpec(1000, 1000, 2)};
  p.pyramid.valid_ranges = {{0, INFINITY}, {0, INFINITY}};
  p.chips = {ChipParams{0.5, 3, k}};
  return p;
}

class WrongDims final : public Detector {
 public:
  DetectorOutput detect(const Scene&, const ChipFrame& region, int, bool want_focus) const override {
    DetectorOutput o;
    if (want_focus) o.focus = ProbMap(1, 1, 0.0f);
    (void)region;
    return o;
  }
};

class WrongSpace final : public Detector {
 public:
  DetectorOutput detect(const Scene& scene, const ChipFrame& region, int stride, bool want_focus) const override {
    auto o = oracle_detect(scene, region, stride, OracleNoise{}, LabelParams{}, want_focus);
    o.detections.emplace_back(BoxPx(1, 1, 5, 5), 0.5, 1);
    return o;
  }
};

}  // namespace

TEST_CASE("group chips pads to the quantum") {
  const std::vector<BoxPx> two = {BoxPx(0, 0, 500, 500, Space::scaled(2)), BoxPx(600, 0, 512, 512, Space::scaled(2))};
  const auto b = group_chips(two, 512, 3);
  REQUIRE(b.groups.size() == 1);
  CHECK(b.groups[0].padded_w == 512);
  CHECK(b.groups[0].padded_h == 512);
  CHECK(b.groups[0].members.size() == 2);
  CHECK(b.raw_pixels == 500 * 500 + 512 * 512);
  CHECK(b.padded_pixels == 2 * 512 * 512);

  const std::vector<BoxPx> one = {BoxPx(0, 0, 100, 70, Space::scaled(1))};
  const auto s = group_chips(one, 64, 3);
  CHECK(s.padded_pixels == 128 * 128);
  CHECK(group_chips(one, 1, 3).padded_pixels == s.raw_pixels);

  const std::vector<BoxPx> shapes = {BoxPx(0, 0, 256, 64, Space::scaled(1)), BoxPx(0, 0, 64, 256, Space::scaled(1))};
  CHECK(group_chips(shapes, 256, 3).groups.size() == 2);
  CHECK(aspect_class(4, 1, 3) == 2);
  CHECK(aspect_class(1, 4, 3) == 0);
  CHECK(aspect_class(1, 1, 3) == 1);
  CHECK_THROWS(group_chips(one, 0, 3));
}

TEST_CASE("stitch focus maps") {
  const ProbMap whole(4, 3, 0.25f);
  const std::vector<ChipFrame> f1 = {ChipFrame{0, 1, 1.0, 0, 0, 64, 48}};
  CHECK(stitch_focus_maps(std::vector{whole}, f1, 64, 48, 16) == whole);

  const std::vector<ProbMap> maps = {ProbMap(2, 2, 0.8f), ProbMap(1, 2, 0.3f)};
  const std::vector<ChipFrame> frames = {ChipFrame{1, 2, 1.0, 0, 0, 32, 32}, ChipFrame{2, 2, 1.0, 64, 16, 16, 32}};
  const auto s = stitch_focus_maps(maps, frames, 100, 64, 16);
  CHECK(s.width() == 7);
  CHECK(s.height() == 4);
  CHECK(s.at(1, 1) == 0.8f);
  CHECK(s.at(4, 1) == 0.3f);
  CHECK(s.at(4, 2) == 0.3f);
  CHECK(s.at(4, 3) == 0.0f);
  CHECK(s.at(3, 0) == 0.0f);

  // region 40 px wide at the right edge of a 100 px image: 3 cells land on cols 4..6
  const std::vector<ProbMap> edge = {ProbMap(3, 1, 1.0f)};
  const std::vector<ChipFrame> ef = {ChipFrame{3, 1, 1.0, 64, 0, 36, 16}};
  const auto se = stitch_focus_maps(edge, ef, 100, 16, 16);
  float sum = 0;
  for (const float v : se.cells()) sum += v;
  CHECK(sum == 3.0f);

  const std::vector<ChipFrame> clash = {ChipFrame{1, 1, 1.0, 0, 0, 32, 32}, ChipFrame{2, 1, 1.0, 16, 16, 32, 32}};
  CHECK_THROWS(stitch_focus_maps(std::vector{ProbMap(2, 2, 1.0f), ProbMap(2, 2, 1.0f)}, clash, 64, 64, 16));
}

TEST_CASE("pyramid geometry and next-scale frames") {
  const auto geo = pyramid_geometry(PyramidConfig::defaults(), 640, 480);
  REQUIRE(geo.size() == 3);
  CHECK(geo[0].zoom == doctest::Approx(0.8));
  CHECK(geo[0].width == 512);
  CHECK(geo[0].height == 384);
  CHECK(geo[1].width == 1067);
  CHECK(geo[1].height == 800);
  CHECK(geo[2].width == 1867);
  const ScaleGeometry from{1, 1.0, 640, 480};
  const std::vector<FocusChip> chips = {{BoxPx(10, 10, 100, 100, Space::scaled(1)), 1, 0},
                                        {BoxPx(115, 10, 20, 20, Space::scaled(1)), 1, 1}};
  const auto frames = frames_for_next_scale(chips, from, geo[1], 16, 5);
  // x: [10,110)*z -> [16.67,183.3) -> [16,192); second [191.7,225) -> [176,240): overlap, merged
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].id == 5);
  CHECK(frames[0].x0 == 16);
  CHECK(frames[0].width == 240 - 16);
  CHECK(std::fmod(frames[0].y0, 16) == 0);
}

TEST_CASE("empty scene only pays for scale 1") {
  Scene s;
  s.image_id = 1;
  s.width = 640;
  s.height = 480;
  const auto r = run_cascade(s, OracleDetector{}, CascadeParams{});
  CHECK(r.detections.empty());
  CHECK(r.report.total_raw() == 512 * 384);
  CHECK(r.report.scales[1].raw_pixels == 0);
  CHECK(r.report.scales[2].chip_count == 0);
  CHECK(r.report.baseline_pixels() == 512 * 384 + 1067 * 800 + 1867 * 1400);
  CHECK(r.report.speedup() == double(r.report.baseline_pixels()) / (512 * 384));
}

TEST_CASE("one small object is found once and drives the chips") {
  const Scene s = one_object(300, 200, 20, 20);
  const auto r = run_cascade(s, OracleDetector{}, CascadeParams{});
  REQUIRE(r.detections.size() == 1);
  CHECK(oracle::box_iou(r.detections[0].box, s.objects[0].box) > 0.999);
  CHECK(r.detections[0].score == 1.0);
  CHECK(r.report.scales[1].chip_count == 1);
  CHECK(r.report.scales[2].chip_count == 1);
  CHECK(r.report.scales[1].raw_pixels < r.report.scales[1].baseline_pixels);
  for (const auto& reg : r.regions) {
    if (reg.frame.scale_index == 1) continue;
    CHECK(contains(reg.frame.original_rect(), s.objects[0].box));
  }
}

TEST_CASE("t = 1 reduces to scale 1 inference") {
  const Scene s = one_object(300, 200, 20, 20);
  CascadeParams p;
  p.chips = {ChipParams{1.0, 3, 512}};
  const auto r = run_cascade(s, OracleDetector{}, p);
  CHECK(r.report.total_raw() == 512 * 384);
  for (const auto& reg : r.regions) CHECK(reg.frame.scale_index == 1);
  // scale 1 alone, keeping only its valid range
  CHECK(r.detections.empty());  // 20 px is below the scale-1 range [90, inf)
}

TEST_CASE("speedup of the two-scale example") {
  const Scene s = one_object(240, 240, 20, 20, 500, 500);
  const auto r = run_cascade(s, OracleDetector{}, two_scale_params(128));
  CHECK(r.report.scales[0].raw_pixels == 500 * 500);
  CHECK(r.report.scales[1].raw_pixels == 128 * 128);
  CHECK(r.report.baseline_pixels() == 500 * 500 + 1000 * 1000);
  CHECK(r.report.speedup() == doctest::Approx(4.6925).epsilon(1e-4));
}

TEST_CASE("cascade equals the full pyramid on small scenes") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i) {
    SceneSpec spec;
    spec.seed = rng();
    spec.width = 320;
    spec.height = 240;
    spec.small = {2, 26, 62};
    spec.medium = {1, 66, 120};
    spec.large = {1, 165, 200};
    spec.max_aspect = 1.5;
    const Scene s = synth_scene(spec);
    CascadeParams p;
    p.pyramid.scales = {ScaleSpec(60, 64, 1), ScaleSpec(100, 160, 2), ScaleSpec(175, 250, 3)};
    p.pyramid.stride = 8;
    p.pyramid.valid_ranges = {{160, INFINITY}, {64, 160}, {0, 64}};
    p.chips = {ChipParams{0.5, 3, 64}};
    const auto a = run_cascade(s, OracleDetector{}, p);
    const auto b = run_full_pyramid(s, OracleDetector{}, p);
    REQUIRE(a.detections.size() == b.detections.size());
    for (std::size_t j = 0; j < a.detections.size(); ++j) {
      CHECK(a.detections[j].box == b.detections[j].box);
      CHECK(a.detections[j].score == b.detections[j].score);
    }
    CHECK(a.report.total_raw() <= b.report.total_raw());
  }
}

TEST_CASE("detector contract is enforced") {
  const Scene s = one_object(300, 200, 20, 20);
  CHECK_THROWS_AS(run_cascade(s, WrongDims{}, CascadeParams{}), ContractViolation);
  CHECK_THROWS_AS(run_cascade(s, WrongSpace{}, CascadeParams{}), ContractViolation);
}

TEST_CASE("pixel reports add up") {
  PixelReport a, b;
  a.images = 1;
  a.scales = {{1, 10, 12, 1, 100}, {2, 5, 8, 2, 400}};
  b.images = 2;
  b.scales = {{2, 1, 1, 1, 400}, {1, 3, 3, 1, 100}};
  PixelReport ab = a;
  ab += b;
  PixelReport ba = b;
  ba += a;
  CHECK(ab == ba);
  CHECK(ab.total_raw() == 19);
  CHECK(ab.total_padded() == 24);
  CHECK(ab.total_chips() == 5);
  CHECK(ab.baseline_pixels() == 1000);
  CHECK(ab.images == 3);
}

TEST_CASE("oracle detector") {
  const Scene s = one_object(100, 100, 40, 30);
  const ChipFrame whole{0, 1, 1.0, 0, 0, 640, 480};
  auto o = oracle_detect(s, whole, 16, OracleNoise{}, LabelParams{});
  REQUIRE(o.detections.size() == 1);
  CHECK(o.detections[0].box == BoxPx(100, 100, 40, 30, Space::chip(0)));
  CHECK(o.detections[0].score == 1.0);
  REQUIRE(o.focus);
  CHECK(o.focus->width() == 40);

  // partially inside: clipped box
  const ChipFrame part{4, 2, 2.0, 220, 0, 64, 480};
  o = oracle_detect(s, part, 16, OracleNoise{}, LabelParams{});
  REQUIRE(o.detections.size() == 1);
  CHECK(o.detections[0].box == BoxPx(0, 200, 60, 60, Space::chip(4)));

  // scaled sqrt(area) = 200: detected, no focus pixels
  const Scene big = one_object(100, 100, 100, 100);
  o = oracle_detect(big, ChipFrame{0, 1, 2.0, 0, 0, 1280, 960}, 16, OracleNoise{}, LabelParams{});
  CHECK(o.detections.size() == 1);
  float total = 0;
  for (const float v : o.focus->cells()) total += v;
  CHECK(total == 0);

  OracleNoise miss;
  miss.miss_rate = 1.0;
  o = oracle_detect(s, whole, 16, miss, LabelParams{});
  CHECK(o.detections.empty());

  OracleNoise noisy;
  noisy.jitter_px = 2;
  noisy.false_positive_rate = 20;
  noisy.map_noise_sd = 0.1;
  noisy.seed = 9;
  const auto n1 = oracle_detect(s, whole, 16, noisy, LabelParams{});
  const auto n2 = oracle_detect(s, whole, 16, noisy, LabelParams{});
  REQUIRE(n1.detections.size() == n2.detections.size());
  for (std::size_t i = 0; i < n1.detections.size(); ++i) CHECK(n1.detections[i].box == n2.detections[i].box);
  CHECK(*n1.focus == *n2.focus);
  noisy.seed = 10;
  const auto n3 = oracle_detect(s, whole, 16, noisy, LabelParams{});
  CHECK_FALSE(*n1.focus == *n3.focus);
}

TEST_CASE("synthetic scenes") {
  SceneSpec none;
  none.seed = 1;
  CHECK(synth_scene(none).objects.empty());

  SceneSpec ten;
  ten.small = {10, 16, 64};
  ten.seed = 7;
  const auto a = synth_scene(ten);
  const auto b = synth_scene(ten);
  REQUIRE(a.objects.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a.objects[i].box == b.objects[i].box);
    CHECK(a.objects[i].box.sqrt_area() >= 16 - 1e-9);
    CHECK(a.objects[i].box.sqrt_area() <= 64 + 1e-9);
  }
  CHECK_NOTHROW(a.validate());

  SceneSpec sparse;
  sparse.small = {3, 16, 20};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sparse.seed = seed;
    const double cov = area_coverage(synth_scene(sparse), 0, 32);
    CHECK(cov >= 0.001);
    CHECK(cov <= 0.01);
  }

  SceneSpec crowded;
  crowded.large = {100, 200, 256};
  crowded.max_attempts = 50;
  CHECK_THROWS_AS(synth_scene(crowded), InfeasibleScene);
}
