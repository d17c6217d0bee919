// Serial reference kernels against the OpenMP path at sensor resolution.

#include <benchmark/benchmark.h>

#include <random>

#include "bubble/flow.hpp"
#include "bubble/kernels.hpp"
#include "bubble/membrane.hpp"

using namespace bubble;
using kernels::Backend;

namespace {

constexpr int kW = 224, kH = 171;

Grid<double> noise_image(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Grid<double> g(kW, kH);
  for (auto& v : g.values()) v = u(rng);
  return g;
}

Backend backend_of(const benchmark::State& s) { return s.range(0) == 0 ? Backend::reference : Backend::omp; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) == 0 ? "reference" : "omp"); }

void BM_PolyExpand(benchmark::State& s) {
  const auto img = noise_image(1);
  const kernels::PolyBasis basis(7, 1.5);
  kernels::PolyField out;
  for (auto _ : s) {
    kernels::poly_expand(img, basis, out, backend_of(s));
    benchmark::DoNotOptimize(out);
  }
  label(s);
}

void BM_BoxAverage(benchmark::State& s) {
  kernels::FlowSystem sys(kW, kH, {1.0, 0.5, 2.0, 0.1, -0.3}), out;
  for (auto _ : s) {
    kernels::box_average(sys, 15, out, backend_of(s));
    benchmark::DoNotOptimize(out);
  }
  label(s);
}

void BM_GaussianBlur(benchmark::State& s) {
  const auto img = noise_image(2);
  Grid<double> out;
  for (auto _ : s) {
    kernels::gaussian_blur(img, 1.5, out, backend_of(s));
    benchmark::DoNotOptimize(out);
  }
  label(s);
}

void BM_DenseFlow(benchmark::State& s) {
  const auto state = sim::inflate_shape(sim::BubbleConfig{}, 1050.0);
  const auto a = sim::render_ir(state);
  const auto b = sim::render_ir(sim::apply_shear(
      sim::press_object(state, sim::ObjectPrimitive::cylinder(22.0), 25.0), {1.0, 0.0}));
  flow::FlowParams p;
  p.backend = backend_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(flow::dense_flow(a, b, p));
  label(s);
}

void BM_RenderDepth(benchmark::State& s) {
  const auto state = sim::inflate_shape(sim::BubbleConfig{}, 1050.0);
  sim::RenderOptions o;
  o.backend = backend_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(sim::render_depth(state, o));
  label(s);
}

}  // namespace

BENCHMARK(BM_PolyExpand)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxAverage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussianBlur)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseFlow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderDepth)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
