#include "autofocus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#include "autofocus/oracle.hpp"

namespace autofocus {

RecallResult focuspixel_recall(const ProbMap& pred, const LabelMap& gt, double t) {
  if (!pred.same_shape(gt)) throw std::invalid_argument("prediction and label maps differ in size");
  const float thr = static_cast<float>(t);
  std::int64_t positives = 0, hits = 0, selected = 0;
  const auto p = pred.cells();
  const auto g = gt.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool on = p[i] > thr;
    selected += on;
    if (g[i] > 0) {
      ++positives;
      hits += on;
    }
  }
  RecallResult r;
  r.recall = positives == 0 ? 1.0 : double(hits) / double(positives);
  r.area_ratio = p.empty() ? 0.0 : double(selected) / double(p.size());
  return r;
}

std::vector<CurvePoint> focuspixel_curve(const ProbMap& pred, const LabelMap& gt, std::span<const double> thresholds) {
  std::vector<CurvePoint> pts;
  for (const double t : thresholds) {
    const auto r = focuspixel_recall(pred, gt, t);
    pts.push_back({t, r.area_ratio, r.recall});
  }
  return pts;
}

std::vector<BoxPx> confident_subset(std::span<const BoxPx> gts, std::span<const Detection> dets, double iou_min,
                                    double score_min) {
  std::vector<BoxPx> kept;
  for (const auto& g : gts) {
    const bool covered = std::any_of(dets.begin(), dets.end(), [&](const Detection& d) {
      return d.score > score_min && iou(g, d.box) > iou_min;
    });
    if (covered) kept.push_back(g);
  }
  return kept;
}

RecallResult focuschip_recall(std::span<const FocusChip> chips, std::span<const BoxPx> gts, double image_w,
                              double image_h) {
  for (std::size_t i = 0; i < chips.size(); ++i) {
    for (std::size_t j = i + 1; j < chips.size(); ++j) {
      if (intersection_area(chips[i].rect, chips[j].rect) > 0) {
        throw std::invalid_argument("chips " + std::to_string(chips[i].id) + " and " + std::to_string(chips[j].id) +
                                    " overlap");
      }
    }
  }
  double chip_area = 0;
  for (const auto& c : chips) chip_area += c.rect.area();
  std::size_t enclosed = 0;
  for (const auto& g : gts) {
    if (std::any_of(chips.begin(), chips.end(), [&](const FocusChip& c) { return contains(c.rect, g); })) ++enclosed;
  }
  RecallResult r;
  r.recall = gts.empty() ? 1.0 : double(enclosed) / double(gts.size());
  r.area_ratio = chip_area / (image_w * image_h);
  return r;
}

std::vector<SpeedupPoint> speedup_bound(std::span<const Scene> scenes, const CascadeParams& base,
                                        const LabelParams& labels, std::span<const double> ks) {
  const OracleDetector oracle(labels, OracleNoise{});
  std::vector<SpeedupPoint> curve;
  for (const double k : ks) {
    CascadeParams params = base;
    for (auto& cp : params.chips) cp.k = k;
    std::vector<PixelReport> reports(scenes.size());
    std::vector<std::exception_ptr> errors(scenes.size());
    const auto n = static_cast<std::ptrdiff_t>(scenes.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        reports[i] = run_cascade(scenes[i], oracle, params).report;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    PixelReport total;
    for (const auto& r : reports) total += r;
    curve.push_back({k, total.speedup(), total});
  }
  return curve;
}

namespace {

struct RankedDet {
  std::size_t image;
  const Detection* det;
};

double category_ap(std::span<const EvalImage> images, int category, double threshold) {
  std::size_t n_gt = 0;
  std::vector<std::vector<std::size_t>> gt_idx(images.size());
  std::vector<RankedDet> ranked;
  for (std::size_t im = 0; im < images.size(); ++im) {
    for (std::size_t g = 0; g < images[im].gts.size(); ++g) {
      if (images[im].gts[g].category == category) {
        gt_idx[im].push_back(g);
        ++n_gt;
      }
    }
    for (const auto& d : images[im].dets) {
      if (d.category == category) ranked.push_back({im, &d});
    }
  }
  if (n_gt == 0) return 0.0;
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDet& a, const RankedDet& b) {
    return a.det->score > b.det->score;
  });

  std::vector<std::vector<bool>> used(images.size());
  for (std::size_t im = 0; im < images.size(); ++im) used[im].assign(gt_idx[im].size(), false);

  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& [im, det] = ranked[i];
    double best = -1;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < gt_idx[im].size(); ++j) {
      if (used[im][j]) continue;
      const double o = iou(images[im].gts[gt_idx[im][j]].box, det->box);
      if (o >= threshold && o > best) {
        best = o;
        best_j = j;
      }
    }
    if (best >= 0) {
      used[im][best_j] = true;
      ++tp;
    }
    precision.push_back(double(tp) / double(i + 1));
    recall.push_back(double(tp) / double(n_gt));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0;
  for (int j = 0; j <= 100; ++j) {
    const double r = j / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

}  // namespace

APResult average_precision(std::span<const EvalImage> images, std::span<const double> iou_thresholds) {
  std::set<int> categories;
  for (const auto& im : images) {
    for (const auto& g : im.gts) categories.insert(g.category);
  }
  APResult res;
  res.thresholds.assign(iou_thresholds.begin(), iou_thresholds.end());
  for (const double thr : iou_thresholds) {
    double sum = 0;
    for (const int c : categories) sum += category_ap(images, c, thr);
    res.ap.push_back(categories.empty() ? 0.0 : sum / double(categories.size()));
  }
  if (!res.ap.empty()) {
    double s = 0;
    for (const double a : res.ap) s += a;
    res.mean = s / double(res.ap.size());
  }
  return res;
}

APResult average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           std::span<const double> iou_thresholds) {
  const EvalImage one{{gts.begin(), gts.end()}, {dets.begin(), dets.end()}};
  return average_precision(std::span<const EvalImage>(&one, 1), iou_thresholds);
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

}  // namespace autofocus
