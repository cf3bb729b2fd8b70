#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "opttomo/attenuation.hpp"

namespace opttomo {

// One detector row across all turntable angles. Column c sits at full-frame
// detector coordinate u0 + c.
struct FanSinogram {
  std::size_t n_cols = 0;
  std::size_t n_views = 0;
  std::vector<double> angles_deg;  // uniform, full 360 degree coverage
  double u0 = 0;
  std::size_t row = 0;
  double z_mm = 0;
  EffectiveGeometry geometry;
  std::vector<double> values;  // [view][col]

  double at(std::size_t view, std::size_t col) const {
    return values[view * n_cols + col];
  }
};

// Parallel-beam sinogram on a uniform (s, phi) grid. s is symmetric about
// the rotation axis; phi covers a full turn modulo 360.
struct ParallelSinogram {
  std::size_t n_s = 0;
  std::size_t n_views = 0;
  double s_max_mm = 0;
  std::vector<double> phi_deg;
  std::size_t row = 0;
  double z_mm = 0;
  std::optional<EffectiveGeometry> geometry;
  std::vector<double> values;  // [view][s]

  double ds() const {
    return n_s > 1 ? 2.0 * s_max_mm / static_cast<double>(n_s - 1) : 0.0;
  }
  double s(std::size_t i) const {
    return -s_max_mm + static_cast<double>(i) * ds();
  }
  double at(std::size_t view, std::size_t i) const {
    return values[view * n_s + i];
  }
};

FanSinogram extract_row_sinogram(const AttenuationStack& stack, std::size_t row);

// Inverse-map resampling: each (s, phi) target pulls from the fan grid at
// gamma = asin(s / D), theta = phi - gamma, u = c_x + f tan(gamma), with
// bilinear interpolation; view lookups wrap modulo the full turn. Targets
// outside the fan aperture are zero.
ParallelSinogram fan_to_parallel_rebin(const FanSinogram& fan);

}  // namespace opttomo
