#include "autofocus/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "autofocus/fpm.hpp"
#include "autofocus/io.hpp"
#include "autofocus/metrics.hpp"

namespace autofocus {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

double parse_number(const std::string& tok, const std::string& what) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tok.size()) throw InputError(what + ": '" + tok + "' is not a number");
  return v;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> v;
  for (const auto& tok : split(text, ',')) v.push_back(parse_number(tok, what));
  if (v.empty()) throw InputError(what + ": empty list");
  return v;
}

std::vector<ScaleSpec> parse_scales(const std::string& text) {
  std::vector<ScaleSpec> scales;
  int idx = 1;
  for (const auto& part : split(text, ';')) {
    const auto v = parse_numbers(part, "--scales");
    if (v.size() != 2) throw InputError("--scales: expected 'min,max' pairs, got '" + part + "'");
    try {
      scales.emplace_back(v[0], v[1], idx++);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--scales: ") + e.what());
    }
  }
  if (scales.empty()) throw InputError("--scales: no scales given");
  return scales;
}

std::vector<ValidRange> parse_ranges(const std::string& text) {
  std::vector<ValidRange> ranges;
  for (const auto& part : split(text, ';')) {
    const auto v = parse_numbers(part, "--ranges");
    if (v.size() != 2) throw InputError("--ranges: expected 'lo,hi' pairs, got '" + part + "'");
    ranges.push_back({v[0], v[1]});
  }
  return ranges;
}

namespace {

struct Flags {
  std::string config;
  std::string scene, probmap, labels_path, detections, chips, geometry;
  std::string out, report, trace_prefix;
  std::string scales, ranges;
  std::string k_list = "64,128,256,512";
  std::string thresholds = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::string ious;
  std::string level = "pixel";
  int stride = 16;
  double a = 5, b = 64, c = 90;
  double t = 0.5;
  int d = 3;
  double k = 512;
  double sigma = 0.55;
  std::uint64_t seed = 0;
  double miss_rate = 0, fp_rate = 0, jitter = 0, map_noise = 0;
  std::int64_t image_id = 0;
  bool has_image_id = false;
  int scale_index = 1;
  int image_w = 0, image_h = 0;
  bool full = false;
  bool all_gts = false;
  // synth
  int count = 1, width = 640, height = 480, n_small = 2, n_medium = 1, n_large = 1, categories = 1;
};

bool given(const CLI::App* sub, const char* name) {
  try {
    return sub->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

// Defaults, then --config, then explicit flags.
RunConfig build_config(const CLI::App* sub, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) apply_config(read_json(f.config), cfg);
  auto& pyr = cfg.cascade.pyramid;
  if (given(sub, "--scales")) {
    pyr.scales = parse_scales(f.scales);
    if (!given(sub, "--ranges") && pyr.valid_ranges.size() != pyr.scales.size()) {
      pyr.valid_ranges.assign(pyr.scales.size(), ValidRange{});
    }
  }
  if (given(sub, "--ranges")) pyr.valid_ranges = parse_ranges(f.ranges);
  if (given(sub, "--stride")) pyr.stride = f.stride;
  for (auto& cp : cfg.cascade.chips) {
    if (given(sub, "--t")) cp.t = f.t;
    if (given(sub, "--d")) cp.d = f.d;
    if (given(sub, "--k")) cp.k = f.k;
  }
  if (given(sub, "--sigma")) cfg.cascade.stack.sigma = f.sigma;
  if (given(sub, "--a")) cfg.labels.a = f.a;
  if (given(sub, "--b")) cfg.labels.b = f.b;
  if (given(sub, "--c")) cfg.labels.c = f.c;
  if (given(sub, "--seed")) cfg.noise.seed = f.seed;
  if (given(sub, "--miss-rate")) cfg.noise.miss_rate = f.miss_rate;
  if (given(sub, "--fp-rate")) cfg.noise.false_positive_rate = f.fp_rate;
  if (given(sub, "--jitter")) cfg.noise.jitter_px = f.jitter;
  if (given(sub, "--map-noise")) cfg.noise.map_noise_sd = f.map_noise;
  cfg.labels.stride = pyr.stride;
  try {
    cfg.cascade.validate();
    cfg.labels.validate();
    cfg.noise.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("configuration: ") + e.what());
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw InputError("write failed for " + path);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string("missing required ") + flag);
}

const Scene& pick_scene(const AnnotationSet& set, const Flags& f) {
  if (set.scenes.empty()) throw InputError(f.scene + ": no images");
  if (!f.has_image_id) {
    if (set.scenes.size() > 1) throw InputError(f.scene + ": several images, choose one with --image-id");
    return set.scenes.front();
  }
  for (const auto& s : set.scenes) {
    if (s.image_id == f.image_id) return s;
  }
  throw InputError(f.scene + ": no image with id " + std::to_string(f.image_id));
}

// GT boxes of a scene expressed in scaled-image pixels of scale `index`.
std::vector<BoxPx> scaled_gts(const Scene& scene, const ScaleGeometry& g) {
  std::vector<BoxPx> boxes;
  for (const auto& o : scene.objects) {
    const auto& b = o.box;
    auto clipped = clip_to(BoxPx(b.x() * g.zoom, b.y() * g.zoom, b.w() * g.zoom, b.h() * g.zoom, Space::scaled(g.index)),
                           g.width, g.height);
    if (clipped) boxes.push_back(*clipped);
  }
  return boxes;
}

const ScaleGeometry& scale_at(const std::vector<ScaleGeometry>& geo, int index) {
  if (index < 1 || index > static_cast<int>(geo.size())) {
    throw InputError("--scale-index " + std::to_string(index) + " outside 1.." + std::to_string(geo.size()));
  }
  return geo[index - 1];
}

int cmd_labels(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.scene, "--scene");
  require(f.out, "--out");
  const RunConfig cfg = build_config(sub, f);
  const auto set = read_annotations(f.scene);
  const Scene& scene = pick_scene(set, f);
  const auto geo = pyramid_geometry(cfg.cascade.pyramid, scene.width, scene.height);
  const auto& g = scale_at(geo, f.scale_index);
  const auto boxes = scaled_gts(scene, g);
  const auto labels = assign_labels(boxes, static_cast<int>(g.width), static_cast<int>(g.height), cfg.labels,
                                    Space::scaled(g.index));
  write_labelmap(f.out, labels);
  const auto st = label_stats(labels);
  out << "image " << scene.image_id << " scale " << g.index << ": " << labels.width() << "x" << labels.height()
      << " positive " << st.positive << " negative " << st.negative << " invalid " << st.invalid << "\n";
  return 0;
}

int cmd_chips(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.probmap, "--probmap");
  require(f.out, "--out");
  const RunConfig cfg = build_config(sub, f);
  const ProbMap map = read_probmap(f.probmap);
  const int s = cfg.cascade.pyramid.stride;
  const int w = f.image_w > 0 ? f.image_w : map.width() * s;
  const int h = f.image_h > 0 ? f.image_h : map.height() * s;
  std::vector<FocusChip> chips;
  try {
    chips = generate_chips(map, cfg.cascade.chips.front(), w, h, s, f.scale_index);
  } catch (const std::invalid_argument& e) {
    throw InputError(f.probmap + ": " + e.what());
  }
  std::vector<ChipRecord> recs;
  for (const auto& c : chips) recs.push_back({f.image_id, c});
  write_json(f.out, chips_to_json(recs));
  out << chips.size() << " chips\n";
  return 0;
}

int cmd_stack(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.detections, "--detections");
  require(f.chips, "--chips");
  require(f.geometry, "--geometry");
  require(f.out, "--out");
  RunConfig cfg = build_config(sub, f);
  const auto images = parse_geometry(read_json(f.geometry));
  const auto chip_recs = parse_chips(read_json(f.chips));
  const auto dets = parse_detections(read_json(f.detections));

  std::vector<ImageDetections> results;
  std::size_t consumed = 0;
  for (const auto& im : images) {
    PyramidConfig pyr = cfg.cascade.pyramid;
    pyr.scales = im.scales;
    if (pyr.valid_ranges.size() != pyr.scales.size()) pyr.valid_ranges.assign(pyr.scales.size(), ValidRange{});
    try {
      pyr.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(f.geometry + ": image " + std::to_string(im.image_id) + ": " + e.what());
    }
    const auto geo = pyramid_geometry(pyr, im.width, im.height);

    std::vector<ChipDetections> regions;
    std::map<int, std::size_t> by_id;
    for (const auto& r : chip_recs) {
      if (r.image_id != im.image_id) continue;
      const auto& sp = r.chip.rect.space();
      if (sp.kind != SpaceKind::ScaledImage || sp.index < 1 || sp.index > static_cast<int>(geo.size())) {
        throw InputError(f.chips + ": chip " + std::to_string(r.chip.id) + " of image " + std::to_string(im.image_id) +
                         " must be tagged with a scaled-image space of a known scale");
      }
      const auto& g = geo[sp.index - 1];
      if (!by_id.emplace(r.chip.id, regions.size()).second) {
        throw InputError(f.chips + ": duplicate chip id " + std::to_string(r.chip.id) + " in image " +
                         std::to_string(im.image_id));
      }
      const auto& b = r.chip.rect;
      regions.push_back({ChipFrame{r.chip.id, sp.index, g.zoom, b.x(), b.y(), b.w(), b.h()}, {}});
    }
    for (const auto& d : dets) {
      if (d.image_id != im.image_id) continue;
      ++consumed;
      for (const auto& det : d.detections) {
        const auto& sp = det.box.space();
        const auto it = by_id.find(sp.index);
        if (sp.kind != SpaceKind::ChipLocal || it == by_id.end()) {
          throw InputError(f.detections + ": image " + std::to_string(im.image_id) + " has a " + sp.str() +
                           " detection with no matching chip");
        }
        Detection copy = det;
        copy.scale_index = regions[it->second].frame.scale_index;
        regions[it->second].detections.push_back(copy);
      }
    }
    std::vector<Detection> final_dets;
    try {
      final_dets = focus_stack(geo, regions, pyr, cfg.cascade.stack);
    } catch (const std::invalid_argument& e) {
      throw InputError("image " + std::to_string(im.image_id) + ": " + e.what());
    } catch (const std::logic_error& e) {
      throw InputError("image " + std::to_string(im.image_id) + ": " + e.what());
    }
    results.push_back({im.image_id, std::move(final_dets)});
  }
  if (consumed != dets.size()) throw InputError(f.detections + ": detections for an image missing from the geometry");
  write_json(f.out, detections_to_json(results));
  std::size_t n = 0;
  for (const auto& r : results) n += r.detections.size();
  out << n << " detections\n";
  return 0;
}

int cmd_pipeline(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.scene, "--scene");
  require(f.out, "--out");
  const RunConfig cfg = build_config(sub, f);
  const auto set = read_annotations(f.scene);
  const OracleDetector oracle(cfg.labels, cfg.noise);

  std::vector<CascadeResult> results(set.scenes.size());
  std::vector<std::exception_ptr> errors(set.scenes.size());
  const auto n = static_cast<std::ptrdiff_t>(set.scenes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i] = f.full ? run_full_pyramid(set.scenes[i], oracle, cfg.cascade)
                          : run_cascade(set.scenes[i], oracle, cfg.cascade);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw InputError(f.scene + ": image " + std::to_string(set.scenes[i].image_id) + ": " + e.what());
    }
  }

  std::vector<ImageDetections> dets;
  PixelReport total;
  for (std::size_t i = 0; i < results.size(); ++i) {
    dets.push_back({set.scenes[i].image_id, results[i].detections});
    total += results[i].report;
  }
  write_json(f.out, detections_to_json(dets));
  if (!f.report.empty()) write_json(f.report, report_to_json(total));

  if (!f.trace_prefix.empty()) {
    std::vector<ChipRecord> regions;
    std::vector<ImageDetections> raw;
    std::vector<ImageGeometry> geometry;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto id = set.scenes[i].image_id;
      ImageDetections rd{id, {}};
      for (const auto& r : results[i].regions) {
        // source_scale: the scale whose focus map picked this region, 0 for the whole image at scale 1
        const int source = r.frame.id == 0 ? 0 : r.frame.scale_index - 1;
        regions.push_back({id, {r.frame.scaled_rect(), source, r.frame.id}});
        rd.detections.insert(rd.detections.end(), r.detections.begin(), r.detections.end());
      }
      raw.push_back(std::move(rd));
      geometry.push_back({id, set.scenes[i].width, set.scenes[i].height, cfg.cascade.pyramid.scales});
    }
    write_json(f.trace_prefix + ".chips.json", chips_to_json(regions));
    write_json(f.trace_prefix + ".rawdets.json", detections_to_json(raw));
    write_json(f.trace_prefix + ".geometry.json", geometry_to_json(geometry));
  }

  std::size_t count = 0;
  for (const auto& d : dets) count += d.detections.size();
  out << set.scenes.size() << " images, " << count << " detections, speedup " << fmt6(total.speedup()) << "\n";
  return 0;
}

int cmd_bound(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.scene, "--scene");
  const RunConfig cfg = build_config(sub, f);
  const auto ks = parse_numbers(f.k_list, "--k");
  const auto set = read_annotations(f.scene);
  const auto curve = speedup_bound(set.scenes, cfg.cascade, cfg.labels, ks);
  std::string csv = "k,speedup\n";
  for (const auto& p : curve) csv += fmt6(p.k) + "," + fmt6(p.speedup) + "\n";
  write_text(f.out, csv, out);
  return 0;
}

int cmd_recall(const CLI::App* sub, const Flags& f, std::ostream& out) {
  require(f.probmap, "--probmap");
  const RunConfig cfg = build_config(sub, f);
  const auto ts = parse_numbers(f.thresholds, "--thresholds");
  const ProbMap pred = read_probmap(f.probmap);
  std::string csv = "param,area_ratio,recall\n";
  if (f.level == "pixel") {
    require(f.labels_path, "--labels");
    const LabelMap gt = read_labelmap(f.labels_path);
    if (!pred.same_shape(gt)) throw InputError(f.probmap + " and " + f.labels_path + " differ in size");
    for (const auto& p : focuspixel_curve(pred, gt, ts)) {
      csv += fmt6(p.param) + "," + fmt6(p.area_ratio) + "," + fmt6(p.recall) + "\n";
    }
  } else if (f.level == "chip") {
    require(f.scene, "--scene");
    const auto set = read_annotations(f.scene);
    const Scene& scene = pick_scene(set, f);
    const auto geo = pyramid_geometry(cfg.cascade.pyramid, scene.width, scene.height);
    const auto& g = scale_at(geo, f.scale_index);
    const int s = cfg.cascade.pyramid.stride;
    const int w = static_cast<int>(g.width), h = static_cast<int>(g.height);
    if (pred.width() != ceil_div(w, s) || pred.height() != ceil_div(h, s)) {
      throw InputError(f.probmap + ": map is " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                       " but scale " + std::to_string(g.index) + " needs " + std::to_string(ceil_div(w, s)) + "x" +
                       std::to_string(ceil_div(h, s)));
    }
    // by default only objects this scale should focus on: the positive label band
    std::vector<BoxPx> gts;
    for (const auto& b : scaled_gts(scene, g))
      if (f.all_gts || classify_size(b.sqrt_area(), cfg.labels) == LabelClass::Positive) gts.push_back(b);
    for (const double t : ts) {
      ChipParams cp = cfg.cascade.chips.front();
      cp.t = t;
      const auto chips = generate_chips(pred, cp, w, h, s, g.index);
      const auto r = focuschip_recall(chips, gts, w, h);
      csv += fmt6(t) + "," + fmt6(r.area_ratio) + "," + fmt6(r.recall) + "\n";
    }
  } else {
    throw InputError("--level must be 'pixel' or 'chip'");
  }
  write_text(f.out, csv, out);
  return 0;
}

int cmd_eval(const CLI::App*, const Flags& f, std::ostream& out) {
  require(f.scene, "--scene");
  require(f.detections, "--detections");
  const auto set = read_annotations(f.scene);
  const auto dets = parse_detections(read_json(f.detections));
  std::map<std::int64_t, std::size_t> index;
  std::vector<EvalImage> images;
  for (const auto& s : set.scenes) {
    index[s.image_id] = images.size();
    EvalImage im;
    for (const auto& o : s.objects) im.gts.push_back({o.box, o.category});
    images.push_back(std::move(im));
  }
  for (const auto& d : dets) {
    const auto it = index.find(d.image_id);
    if (it == index.end()) {
      throw InputError(f.detections + ": detections for image " + std::to_string(d.image_id) + " not in " + f.scene);
    }
    for (const auto& det : d.detections) {
      if (!(det.box.space() == Space::original())) {
        throw InputError(f.detections + ": image " + std::to_string(d.image_id) + " has " + det.box.space().str() +
                         " boxes; evaluation needs original-image boxes");
      }
      images[it->second].dets.push_back(det);
    }
  }
  const auto thr = f.ious.empty() ? coco_iou_thresholds() : parse_numbers(f.ious, "--iou");
  const auto res = average_precision(images, thr);
  std::string csv = "iou,ap\n";
  for (std::size_t i = 0; i < thr.size(); ++i) csv += fmt6(thr[i]) + "," + fmt6(res.ap[i]) + "\n";
  write_text(f.out, csv, out);
  if (!f.out.empty()) out << "mAP " << fmt6(res.mean) << "\n";
  return 0;
}

int cmd_synth(const CLI::App*, const Flags& f, std::ostream& out) {
  require(f.out, "--out");
  if (f.count < 1) throw InputError("--count must be positive");
  AnnotationSet set;
  for (int i = 0; i < f.count; ++i) {
    SceneSpec spec;
    spec.image_id = i + 1;
    spec.width = f.width;
    spec.height = f.height;
    spec.small.count = f.n_small;
    spec.medium.count = f.n_medium;
    spec.large.count = f.n_large;
    spec.categories = f.categories;
    spec.seed = f.seed + static_cast<std::uint64_t>(i);
    set.scenes.push_back(synth_scene(spec));
  }
  write_json(f.out, annotations_to_json(set));
  out << f.count << " scenes\n";
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coarse-to-fine multi-scale inference tools", "autofocus"};
  app.require_subcommand(1);
  Flags f;

  auto* labels = app.add_subcommand("labels", "FocusPixel labels of one image at one scale -> FPM1");
  auto* chips = app.add_subcommand("chips", "probability map (FPM1) -> chips JSON");
  auto* stack = app.add_subcommand("stack", "chip-local detections + processed chips + geometry -> final detections");
  auto* pipeline = app.add_subcommand("pipeline", "oracle cascade over a scene file -> detections + pixel report");
  auto* bound = app.add_subcommand("bound", "speedup upper bound vs k -> CSV k,speedup");
  auto* recall = app.add_subcommand("recall", "recall vs threshold -> CSV param,area_ratio,recall");
  auto* eval = app.add_subcommand("eval", "COCO-style AP per IoU threshold -> CSV iou,ap");
  auto* synth = app.add_subcommand("synth", "synthetic scenes -> annotation JSON");

  const auto add_config = [&](CLI::App* s) {
    s->add_option("--config", f.config, "JSON run configuration");
    s->add_option("--scales", f.scales, "min,max pairs separated by ';'")->default_str("480,512;800,1280;1400,2000");
    s->add_option("--ranges", f.ranges, "valid ranges lo,hi per scale separated by ';'");
    s->add_option("--stride", f.stride, "feature stride")->capture_default_str();
  };
  const auto add_label_flags = [&](CLI::App* s) {
    s->add_option("--a", f.a, "smallest positive sqrt(area)")->capture_default_str();
    s->add_option("--b", f.b, "largest positive sqrt(area)")->capture_default_str();
    s->add_option("--c", f.c, "start of the unlabeled band")->capture_default_str();
  };
  const auto add_chip_flags = [&](CLI::App* s, bool with_k) {
    s->add_option("--t", f.t, "probability threshold")->capture_default_str();
    s->add_option("--d", f.d, "dilation side")->capture_default_str();
    if (with_k) s->add_option("--k", f.k, "minimum chip side")->capture_default_str();
  };
  const auto add_image_id = [&](CLI::App* s) {
    s->add_option("--image-id", f.image_id, "image to use")->each([&](const std::string&) { f.has_image_id = true; });
  };

  add_config(labels);
  add_label_flags(labels);
  labels->add_option("--scene", f.scene, "annotation JSON");
  add_image_id(labels);
  labels->add_option("--scale-index", f.scale_index, "pyramid scale")->capture_default_str();
  labels->add_option("--out", f.out, "output FPM1");

  add_config(chips);
  add_chip_flags(chips, true);
  chips->add_option("--probmap", f.probmap, "FPM1 probability map");
  chips->add_option("--image-w", f.image_w, "image width (default map width * stride)");
  chips->add_option("--image-h", f.image_h, "image height (default map height * stride)");
  chips->add_option("--scale-index", f.scale_index, "scale the map belongs to")->capture_default_str();
  chips->add_option("--image-id", f.image_id, "image id recorded in the output");
  chips->add_option("--out", f.out, "output chips JSON");

  add_config(stack);
  stack->add_option("--sigma", f.sigma, "Soft-NMS sigma")->capture_default_str();
  stack->add_option("--detections", f.detections, "chip-local detections JSON");
  stack->add_option("--chips", f.chips, "processed chips JSON");
  stack->add_option("--geometry", f.geometry, "geometry JSON");
  stack->add_option("--out", f.out, "output detections JSON");

  add_config(pipeline);
  add_label_flags(pipeline);
  add_chip_flags(pipeline, true);
  pipeline->add_option("--sigma", f.sigma, "Soft-NMS sigma")->capture_default_str();
  pipeline->add_option("--seed", f.seed, "oracle noise seed")->capture_default_str();
  pipeline->add_option("--miss-rate", f.miss_rate, "oracle miss probability");
  pipeline->add_option("--fp-rate", f.fp_rate, "oracle false positives per megapixel");
  pipeline->add_option("--jitter", f.jitter, "oracle box jitter, px");
  pipeline->add_option("--map-noise", f.map_noise, "oracle focus-map noise sd");
  pipeline->add_option("--scene", f.scene, "annotation JSON");
  pipeline->add_option("--out", f.out, "output detections JSON");
  pipeline->add_option("--report", f.report, "output pixel report JSON");
  pipeline->add_option("--trace-prefix", f.trace_prefix, "also write <prefix>.chips/.rawdets/.geometry.json");
  pipeline->add_flag("--full", f.full, "process every scale in full (no chips)");

  add_config(bound);
  add_label_flags(bound);
  add_chip_flags(bound, false);
  bound->add_option("--k", f.k_list, "comma-separated k values")->capture_default_str();
  bound->add_option("--scene", f.scene, "annotation JSON");
  bound->add_option("--out", f.out, "output CSV (default stdout)");

  add_config(recall);
  add_chip_flags(recall, true);
  recall->add_option("--probmap", f.probmap, "FPM1 probability map");
  recall->add_option("--labels", f.labels_path, "FPM1 label map (pixel level)");
  recall->add_option("--scene", f.scene, "annotation JSON (chip level)");
  add_image_id(recall);
  recall->add_option("--scale-index", f.scale_index, "scale the map belongs to")->capture_default_str();
  recall->add_option("--level", f.level, "pixel or chip")->capture_default_str();
  recall->add_option("--thresholds", f.thresholds, "comma-separated t values")->capture_default_str();
  recall->add_flag("--all-gts", f.all_gts, "chip level: count every object, not only the positive size band");
  recall->add_option("--out", f.out, "output CSV (default stdout)");

  eval->add_option("--scene", f.scene, "annotation JSON");
  eval->add_option("--detections", f.detections, "detections JSON in original space");
  eval->add_option("--iou", f.ious, "comma-separated IoU thresholds (default 0.5:0.05:0.95)");
  eval->add_option("--out", f.out, "output CSV (default stdout)");

  synth->add_option("--seed", f.seed, "seed of the first scene")->capture_default_str();
  synth->add_option("--count", f.count, "number of scenes")->capture_default_str();
  synth->add_option("--width", f.width, "image width")->capture_default_str();
  synth->add_option("--height", f.height, "image height")->capture_default_str();
  synth->add_option("--small", f.n_small, "objects with sqrt(area) in [16,32)")->capture_default_str();
  synth->add_option("--medium", f.n_medium, "objects with sqrt(area) in [32,96)")->capture_default_str();
  synth->add_option("--large", f.n_large, "objects with sqrt(area) in [96,256)")->capture_default_str();
  synth->add_option("--categories", f.categories, "number of object categories")->capture_default_str();
  synth->add_option("--out", f.out, "output annotation JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "autofocus: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  using Handler = int (*)(const CLI::App*, const Flags&, std::ostream&);
  const std::pair<CLI::App*, Handler> table[] = {{labels, cmd_labels},     {chips, cmd_chips}, {stack, cmd_stack},
                                                 {pipeline, cmd_pipeline}, {bound, cmd_bound}, {recall, cmd_recall},
                                                 {eval, cmd_eval},         {synth, cmd_synth}};
  try {
    for (const auto& [sub, fn] : table) {
      if (sub->parsed()) return fn(sub, f, out);
    }
  } catch (const std::exception& e) {
    err << "autofocus " << app.get_subcommands().front()->get_name() << ": error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"autofocus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace autofocus
