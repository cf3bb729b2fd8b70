#pragma once

#include <cstddef>
#include <vector>

#include "opttomo/sinogram.hpp"
#include "opttomo/volume.hpp"

namespace opttomo {

enum class FilterKind { ramp, ramp_hann };

// Frequency-domain ramp filtering with zero padding to the next power of two
// at or above twice the sample count. The DC gain is exactly zero.
ParallelSinogram ramp_filter(const ParallelSinogram& sinogram,
                             FilterKind kind = FilterKind::ramp);

// The per-bin frequency gain the filter applies to views of n_s samples, one
// entry per padded FFT bin. gain[0] is the DC gain, exactly zero.
std::vector<double> ramp_filter_gain(std::size_t n_s, double ds,
                                     FilterKind kind = FilterKind::ramp);

struct ReconConfig {
  std::size_t grid_size = 256;
  // 0 selects the pixel footprint at the axis, axis_distance / f_eff.
  double pixel_size_mm = 0;
  FilterKind filter = FilterKind::ramp;
};

struct ReconSlice {
  std::size_t n = 0;
  double pixel_size_mm = 0;
  std::size_t row = 0;
  double z_mm = 0;
  std::vector<double> values;  // [y][x], x fastest

  double at(std::size_t iy, std::size_t ix) const { return values[iy * n + ix]; }
};

// Accumulates filtered views at s = x cos(phi) + y sin(phi) with linear
// interpolation, scaled by pi / n_views for the full-turn angle coverage.
ReconSlice backproject(const ParallelSinogram& filtered,
                       const ReconConfig& config);

ReconSlice reconstruct_slice(const AttenuationStack& stack, std::size_t row,
                             const ReconConfig& config);

// One slice per detector row, reconstructed independently; identical output
// for any thread count.
Volume reconstruct_volume(const AttenuationStack& stack,
                          const ReconConfig& config, unsigned threads = 0);

}  // namespace opttomo
