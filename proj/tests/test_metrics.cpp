#include <doctest.h>

#include <cmath>
#include <random>

#include "autofocus/metrics.hpp"
#include "autofocus/oracle.hpp"
#include "oracles.hpp"

using namespace autofocus;

TEST_CASE("focus pixel recall") {
  LabelMap gt(4, 1, 0);
  ProbMap pred(4, 1, 0.0f);
  CHECK(focuspixel_recall(pred, gt, 0.5).recall == 1.0);  // no positives
  for (int c = 0; c < 4; ++c) gt.at(c, 0) = 1;
  CHECK(focuspixel_recall(pred, gt, 0.5).recall == 0.0);
  pred.at(0, 0) = pred.at(1, 0) = pred.at(2, 0) = 0.9f;
  const auto r = focuspixel_recall(pred, gt, 0.5);
  CHECK(r.recall == 0.75);
  CHECK(r.area_ratio == 0.75);

  ProbMap perfect(4, 1, 1.0f);
  for (const double t : {0.0, 0.3, 0.99, 0.999999}) CHECK(focuspixel_recall(perfect, gt, t).recall == 1.0);
  CHECK_THROWS(focuspixel_recall(ProbMap(3, 1, 0.0f), gt, 0.5));

  const std::vector<double> ts = {0.1, 0.5, 0.95};
  const auto curve = focuspixel_curve(pred, gt, ts);
  REQUIRE(curve.size() == 3);
  CHECK(curve[2].recall == 0.0);
  CHECK(curve[0].param == 0.1);
}

TEST_CASE("confident subset") {
  const std::vector<BoxPx> gts = {BoxPx(0, 0, 10, 10)};
  const std::vector<Detection> copy = {Detection(BoxPx(0, 0, 10, 10), 0.9, 1)};
  CHECK(confident_subset(gts, copy).size() == 1);
  // iou 0.4: 40/100 with a 4-wide overlap of a same-size box... use (0,0,10,4): iou 0.4
  const std::vector<Detection> weak = {Detection(BoxPx(0, 0, 10, 4), 0.9, 1)};
  CHECK(oracle::box_iou(gts[0], weak[0].box) == doctest::Approx(0.4));
  CHECK(confident_subset(gts, weak).empty());
  const std::vector<Detection> edge = {Detection(BoxPx(0, 0, 10, 6), 0.5, 1)};
  CHECK(oracle::box_iou(gts[0], edge[0].box) == doctest::Approx(0.6));
  CHECK(confident_subset(gts, edge).empty());
}

TEST_CASE("focus chip recall") {
  const std::vector<BoxPx> gts = {BoxPx(10, 10, 20, 20, Space::scaled(1))};
  const std::vector<FocusChip> whole = {{BoxPx(0, 0, 100, 100, Space::scaled(1)), 1, 0}};
  auto r = focuschip_recall(whole, gts, 100, 100);
  CHECK(r.recall == 1.0);
  CHECK(r.area_ratio == 1.0);

  const std::vector<FocusChip> halves = {{BoxPx(0, 0, 20, 100, Space::scaled(1)), 1, 0},
                                         {BoxPx(20, 0, 80, 100, Space::scaled(1)), 1, 1}};
  r = focuschip_recall(halves, gts, 100, 100);
  CHECK(r.recall == 0.0);

  r = focuschip_recall({}, gts, 100, 100);
  CHECK(r.recall == 0.0);
  CHECK(r.area_ratio == 0.0);

  const std::vector<FocusChip> overlap = {{BoxPx(0, 0, 50, 50, Space::scaled(1)), 1, 0},
                                          {BoxPx(40, 40, 50, 50, Space::scaled(1)), 1, 1}};
  CHECK_THROWS(focuschip_recall(overlap, gts, 100, 100));
}

TEST_CASE("speedup bound") {
  Scene empty;
  empty.image_id = 1;
  empty.width = 640;
  empty.height = 480;
  const std::vector<Scene> one = {empty};
  const std::vector<double> ks = {64, 512};
  auto curve = speedup_bound(one, CascadeParams{}, LabelParams{}, ks);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].speedup == double(curve[0].report.baseline_pixels()) / (512.0 * 384.0));
  CHECK(curve[1].speedup == curve[0].speedup);

  Scene small = empty;
  small.objects.push_back({BoxPx(300, 200, 20, 20), 1});
  const std::vector<Scene> two = {small};
  const std::vector<double> sweep = {64, 128, 256, 512};
  curve = speedup_bound(two, CascadeParams{}, LabelParams{}, sweep);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].speedup <= curve[i - 1].speedup);
  CHECK(curve[0].speedup > 1);

  // k at the largest image side: every region is the whole scaled image
  CascadeParams p;
  const std::vector<double> huge = {4000};
  curve = speedup_bound(two, p, LabelParams{}, huge);
  CHECK(curve[0].speedup == doctest::Approx(1.0));
}

TEST_CASE("average precision examples") {
  const std::vector<GroundTruth> gts = {{BoxPx(0, 0, 10, 10), 1}, {BoxPx(50, 50, 10, 10), 2}};
  const std::vector<Detection> exact = {Detection(BoxPx(0, 0, 10, 10), 1.0, 1),
                                        Detection(BoxPx(50, 50, 10, 10), 1.0, 2)};
  const auto thr = coco_iou_thresholds();
  REQUIRE(thr.size() == 10);
  CHECK(thr.back() == doctest::Approx(0.95));
  auto r = average_precision(exact, gts, thr);
  for (const double a : r.ap) CHECK(a == doctest::Approx(1.0));
  CHECK(r.mean == doctest::Approx(1.0));

  r = average_precision(std::vector<Detection>{}, gts, thr);
  CHECK(r.mean == 0.0);

  const std::vector<GroundTruth> g1 = {{BoxPx(0, 0, 10, 10), 1}};
  const std::vector<Detection> fp_first = {Detection(BoxPx(80, 80, 10, 10), 0.9, 1),
                                           Detection(BoxPx(0, 0, 10, 10), 0.8, 1)};
  const std::vector<double> half = {0.5};
  r = average_precision(fp_first, g1, half);
  CHECK(r.ap[0] == doctest::Approx(0.5));
}

TEST_CASE("average precision matches PR enumeration") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(0, 60), size(4, 30), score(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EvalImage> images(1 + rng() % 3);
    std::vector<oracle::ScoredBox> od;
    std::vector<oracle::TruthBox> og;
    for (std::size_t im = 0; im < images.size(); ++im) {
      const int ng = int(rng() % 6), nd = int(rng() % 8);
      for (int i = 0; i < ng; ++i) {
        const BoxPx b(pos(rng), pos(rng), size(rng), size(rng));
        const int c = 1 + int(rng() % 2);
        images[im].gts.push_back({b, c});
        og.push_back({b, c, int(im)});
      }
      for (int i = 0; i < nd; ++i) {
        BoxPx b(pos(rng), pos(rng), size(rng), size(rng));
        if (!images[im].gts.empty() && rng() % 2) {
          const auto& g = images[im].gts[rng() % images[im].gts.size()].box;
          b = BoxPx(g.x() + pos(rng) / 20, g.y() + pos(rng) / 20, g.w(), g.h());
        }
        const double s = std::round(score(rng) * 10) / 10;  // ties on purpose
        const int c = 1 + int(rng() % 2);
        images[im].dets.emplace_back(b, s, c);
        od.push_back({b, s, c, int(im)});
      }
    }
    const std::vector<double> thr = {0.5, 0.75};
    const auto r = average_precision(images, thr);
    // the library ranks by score across images in input order; the oracle does the same
    for (std::size_t t = 0; t < thr.size(); ++t) CHECK(r.ap[t] == doctest::Approx(oracle::ap_brute(od, og, thr[t])));
  }
}
