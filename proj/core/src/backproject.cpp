#include "opttomo/recon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "opttomo/errors.hpp"
#include "opttomo/parallel.hpp"

namespace opttomo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double default_pixel_size(const ParallelSinogram& sinogram) {
  if (sinogram.geometry.has_value())
    return sinogram.geometry->axis_distance_mm / sinogram.geometry->f_eff_px;
  return sinogram.ds();
}

}  // namespace

ReconSlice backproject(const ParallelSinogram& filtered,
                       const ReconConfig& config) {
  if (config.grid_size == 0)
    fail(errc::config_error, "grid size must be positive");
  if (filtered.n_views == 0 || filtered.n_s < 2)
    fail(errc::data_error, "backprojection needs views and radial samples");
  if (config.pixel_size_mm < 0)
    fail(errc::config_error, "pixel size must be non-negative");

  const std::size_t n = config.grid_size;
  const double ps = config.pixel_size_mm > 0 ? config.pixel_size_mm
                                             : default_pixel_size(filtered);
  if (!(ps > 0)) fail(errc::config_error, "pixel size is not determined");

  ReconSlice slice;
  slice.n = n;
  slice.pixel_size_mm = ps;
  slice.row = filtered.row;
  slice.z_mm = filtered.z_mm;
  slice.values.assign(n * n, 0.0);

  const double half = (static_cast<double>(n) - 1.0) / 2.0;
  const double ds = filtered.ds();
  const double s_max = filtered.s_max_mm;
  const double max_pos = static_cast<double>(filtered.n_s - 1);
  const double scale =
      std::numbers::pi / static_cast<double>(filtered.n_views);

  for (std::size_t k = 0; k < filtered.n_views; ++k) {
    const double phi = filtered.phi_deg[k] * kDegToRad;
    const double cos_phi = std::cos(phi);
    const double sin_phi = std::sin(phi);
    const double* view = &filtered.values[k * filtered.n_s];
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double y = (static_cast<double>(iy) - half) * ps;
      double* out_row = &slice.values[iy * n];
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double x = (static_cast<double>(ix) - half) * ps;
        const double s = x * cos_phi + y * sin_phi;
        const double pos = (s + s_max) / ds;
        if (pos < 0.0 || pos > max_pos) continue;  // beyond measured support
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 >= filtered.n_s - 1) i0 = filtered.n_s - 2;
        const double w = pos - static_cast<double>(i0);
        out_row[ix] += (1.0 - w) * view[i0] + w * view[i0 + 1];
      }
    }
  }

  for (auto& v : slice.values) v *= scale;
  return slice;
}

ReconSlice reconstruct_slice(const AttenuationStack& stack, std::size_t row,
                             const ReconConfig& config) {
  FanSinogram fan = extract_row_sinogram(stack, row);
  ParallelSinogram par = fan_to_parallel_rebin(fan);
  ParallelSinogram filtered = ramp_filter(par, config.filter);
  return backproject(filtered, config);
}

Volume reconstruct_volume(const AttenuationStack& stack,
                          const ReconConfig& config, unsigned threads) {
  if (stack.rows == 0) fail(errc::data_error, "stack has no detector rows");
  if (!stack.geometry.has_value())
    fail(errc::geometry_missing,
         "attenuation stack carries no effective geometry");

  const EffectiveGeometry& g = *stack.geometry;
  const double pitch = g.axis_distance_mm / g.f_eff_px;

  Volume volume;
  volume.nx = config.grid_size;
  volume.ny = config.grid_size;
  volume.n_slices = stack.rows;
  volume.slice_pitch_mm = pitch;
  volume.geometry = g;
  volume.slice_z_mm.resize(stack.rows);
  volume.data.resize(stack.rows * config.grid_size * config.grid_size);

  double pixel_size = 0;

  parallel_for(stack.rows, threads, [&](std::size_t row) {
    ReconSlice slice = reconstruct_slice(stack, row, config);
    volume.slice_z_mm[row] = slice.z_mm;
    std::copy(slice.values.begin(), slice.values.end(),
              volume.data.begin() +
                  static_cast<std::ptrdiff_t>(row * slice.values.size()));
    if (row == 0) pixel_size = slice.pixel_size_mm;
  });

  volume.pixel_size_mm = pixel_size;
  return volume;
}

}  // namespace opttomo
