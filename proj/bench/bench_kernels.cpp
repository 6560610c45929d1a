#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <random>

#include "hdrtv/degradation.hpp"
#include "hdrtv/lut3d.hpp"
#include "hdrtv/metrics.hpp"
#include "hdrtv/pipeline.hpp"

using namespace hdrtv;

namespace {

// Smooth PQ content with a few bright regions; enough texture for every metric.
PixelFrame test_frame(int w, int h) {
  PixelFrame f(w, h, ColorEncoding::hdr_pq());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double base = 0.3 + 0.25 * x / w + 0.1 * y / h;
      const bool bright = ((x / 64) + (y / 64)) % 7 == 0;
      const double v = bright ? 0.78 : base;
      f.set_pixel(x, y, {std::clamp(v + noise(rng), 0.0, 1.0), std::clamp(v * 0.9 + noise(rng), 0.0, 1.0),
                         std::clamp(v * 0.8 + noise(rng), 0.0, 1.0)});
    }
  return f;
}

const PixelFrame& frame_for(int size) {
  static std::map<int, PixelFrame> cache;
  auto it = cache.find(size);
  if (it == cache.end()) it = cache.emplace(size, test_frame(size * 16 / 9, size)).first;
  return it->second;
}

void BM_EvaluateReference(benchmark::State& s) {
  const PixelFrame& f = frame_for(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(metrics::reference::evaluate(f));
  s.SetItemsProcessed(s.iterations() * f.pixel_count());
}

void BM_EvaluateSerial(benchmark::State& s) {
  const PixelFrame& f = frame_for(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(metrics::evaluate(f, Exec::serial));
  s.SetItemsProcessed(s.iterations() * f.pixel_count());
}

void BM_EvaluateParallel(benchmark::State& s) {
  const PixelFrame& f = frame_for(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(metrics::evaluate(f, Exec::parallel));
  s.SetItemsProcessed(s.iterations() * f.pixel_count());
}

void BM_Degrade(benchmark::State& s) {
  const PixelFrame& f = frame_for(540);
  const auto kind = static_cast<DmKind>(s.range(0));
  DegradationSpec spec{kind, kDmJpegQuality, nullptr, 0};
  if (kind == DmKind::lut3d) spec.lut = std::make_shared<const Lut3D>(Lut3D::identity(33));
  const Exec exec = s.range(1) ? Exec::parallel : Exec::serial;
  for (auto _ : s) benchmark::DoNotOptimize(degrade_encoded(f, spec, exec));
  s.SetLabel(std::string(to_string(kind)) + (s.range(1) ? "/parallel" : "/serial"));
  s.SetItemsProcessed(s.iterations() * f.pixel_count());
}

void BM_ResizeArea(benchmark::State& s) {
  const PixelFrame& f = frame_for(1080);
  const Exec exec = s.range(0) ? Exec::parallel : Exec::serial;
  for (auto _ : s) benchmark::DoNotOptimize(resize_area(f, 1280, 720, exec));
}

}  // namespace

BENCHMARK(BM_EvaluateReference)->Arg(540)->Arg(1080)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Arg(540)->Arg(1080)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Arg(540)->Arg(1080)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Degrade)
    ->ArgsProduct({{0, 1, 2, 3}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResizeArea)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
