#include <benchmark/benchmark.h>

#include <cstddef>

#include "opttomo/phantom.hpp"
#include "opttomo/recon.hpp"
#include "opttomo/sinogram.hpp"

namespace {

using namespace opttomo;

EffectiveGeometry bench_geometry() {
  EffectiveGeometry g;
  g.f_eff_px = 6500;
  g.axis_distance_mm = 50;
  g.c_x = 511.5;
  g.c_y = 15.5;
  return g;
}

DigitalPhantom bench_phantom() {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0.4, 0.1, 0.9, 1.0));
  ph.primitives.push_back(make_disk(-0.6, -0.3, 0.5, 2.0));
  return ph;
}

AttenuationStack bench_stack(std::size_t cols, std::size_t n_views) {
  SimulationConfig cfg;
  cfg.geometry = bench_geometry();
  cfg.crop = CropRegion{0, 0, cols, 32};
  cfg.angles_deg.resize(n_views);
  for (std::size_t i = 0; i < n_views; ++i)
    cfg.angles_deg[i] = 360.0 * static_cast<double>(i) / static_cast<double>(n_views);

  ProjectionStack stack = simulate_acquisition(bench_phantom(), cfg);
  IncidentField field = estimate_incident_field(stack, {});
  return beer_lambert(stack, field);
}

void BM_Rebin(benchmark::State& state) {
  AttenuationStack mu = bench_stack(512, 360);
  FanSinogram fan = extract_row_sinogram(mu, 16);
  for (auto _ : state) {
    ParallelSinogram par = fan_to_parallel_rebin(fan);
    benchmark::DoNotOptimize(par.values.data());
  }
}
BENCHMARK(BM_Rebin);

void BM_RampFilter(benchmark::State& state) {
  AttenuationStack mu = bench_stack(512, 360);
  ParallelSinogram par = fan_to_parallel_rebin(extract_row_sinogram(mu, 16));
  for (auto _ : state) {
    ParallelSinogram filtered = ramp_filter(par);
    benchmark::DoNotOptimize(filtered.values.data());
  }
}
BENCHMARK(BM_RampFilter);

void BM_Backproject(benchmark::State& state) {
  AttenuationStack mu = bench_stack(512, 360);
  ParallelSinogram filtered =
      ramp_filter(fan_to_parallel_rebin(extract_row_sinogram(mu, 16)));
  ReconConfig rc;
  rc.grid_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ReconSlice slice = backproject(filtered, rc);
    benchmark::DoNotOptimize(slice.values.data());
  }
}
BENCHMARK(BM_Backproject)->Arg(256)->Arg(512);

void BM_SliceEndToEnd(benchmark::State& state) {
  AttenuationStack mu = bench_stack(512, 360);
  ReconConfig rc;
  rc.grid_size = 256;
  for (auto _ : state) {
    ReconSlice slice = reconstruct_slice(mu, 16, rc);
    benchmark::DoNotOptimize(slice.values.data());
  }
}
BENCHMARK(BM_SliceEndToEnd);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
