#include <benchmark/benchmark.h>

#include <random>

#include "autofocus/chipgen.hpp"
#include "autofocus/labeler.hpp"
#include "autofocus/serial.hpp"

using namespace autofocus;

namespace {

ProbMap make_map(int side) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0, 1);
  ProbMap m(side, side);
  for (auto& v : m.cells()) v = u(rng) < 0.05f ? 0.9f : 0.1f * u(rng);
  return m;
}

std::vector<BoxPx> make_boxes(int side, int n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(0, side - 100), size(3, 100);
  std::vector<BoxPx> boxes;
  for (int i = 0; i < n; ++i) boxes.emplace_back(pos(rng), pos(rng), size(rng), size(rng), Space::scaled(1));
  return boxes;
}

void BM_binarize(benchmark::State& st) {
  const auto m = make_map(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(binarize(m, 0.5));
}

void BM_binarize_serial(benchmark::State& st) {
  const auto m = make_map(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::binarize(m, 0.5));
}

void BM_dilate(benchmark::State& st) {
  const auto b = binarize(make_map(static_cast<int>(st.range(0))), 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(dilate(b, 5));
}

void BM_dilate_serial(benchmark::State& st) {
  const auto b = binarize(make_map(static_cast<int>(st.range(0))), 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(serial::dilate(b, 5));
}

void BM_assign_labels(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const auto boxes = make_boxes(side, 200);
  for (auto _ : st) benchmark::DoNotOptimize(assign_labels(boxes, side, side, LabelParams{}));
}

void BM_assign_labels_serial(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const auto boxes = make_boxes(side, 200);
  for (auto _ : st) benchmark::DoNotOptimize(serial::assign_labels(boxes, side, side, LabelParams{}));
}

void BM_generate_chips(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const auto m = make_map(side);
  for (auto _ : st) benchmark::DoNotOptimize(generate_chips(m, ChipParams{0.5, 3, 512}, side * 16, side * 16, 16));
}

}  // namespace

BENCHMARK(BM_binarize)->Arg(128)->Arg(512);
BENCHMARK(BM_binarize_serial)->Arg(128)->Arg(512);
BENCHMARK(BM_dilate)->Arg(128)->Arg(512);
BENCHMARK(BM_dilate_serial)->Arg(128)->Arg(512);
BENCHMARK(BM_assign_labels)->Arg(1024)->Arg(2048);
BENCHMARK(BM_assign_labels_serial)->Arg(1024)->Arg(2048);
BENCHMARK(BM_generate_chips)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
