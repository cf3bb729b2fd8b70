#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "opttomo/errors.hpp"
#include "opttomo/phantom.hpp"
#include "opttomo/recon.hpp"
#include "opttomo/sinogram.hpp"

using namespace opttomo;

namespace {

constexpr double kPi = std::numbers::pi;

EffectiveGeometry axis_geometry() {
  EffectiveGeometry g;
  g.f_eff_px = 6500;
  g.pixel_pitch_mm = 0.005;
  g.c_x = 127.5;
  g.c_y = 0;
  g.axis_distance_mm = 50;
  return g;
}

// Single-row attenuation stack of analytic fan projections over a full turn.
AttenuationStack fan_stack(const DigitalPhantom& ph, const EffectiveGeometry& g,
                           std::size_t cols, std::size_t n_views) {
  AttenuationStack stack;
  stack.rows = 1;
  stack.cols = cols;
  stack.n_angles = n_views;
  stack.crop = CropRegion{0, 0, cols, 1};
  stack.geometry = g;
  stack.angles_deg.resize(n_views);
  stack.data.resize(n_views * cols);
  for (std::size_t k = 0; k < n_views; ++k) {
    const double theta = 360.0 * static_cast<double>(k) /
                         static_cast<double>(n_views);
    stack.angles_deg[k] = theta;
    for (std::size_t c = 0; c < cols; ++c)
      stack.at(k, 0, c) = analytic_fan_projection(
          ph, g, static_cast<double>(c), g.c_y, theta);
  }
  return stack;
}

// Independent reference: explicit circular convolution with the mean-free
// truncated kernel, matching the frequency-domain path bin for bin.
std::vector<double> direct_ramp(const std::vector<double>& view, double ds) {
  const std::size_t n_s = view.size();
  std::size_t n_pad = 1;
  while (n_pad < 2 * n_s) n_pad <<= 1;

  std::vector<double> taps(n_pad);
  double total = 0;
  for (std::size_t j = 0; j < n_pad; ++j) {
    const std::ptrdiff_t k = j <= n_pad / 2
                                 ? static_cast<std::ptrdiff_t>(j)
                                 : static_cast<std::ptrdiff_t>(j) -
                                       static_cast<std::ptrdiff_t>(n_pad);
    double t = 0;
    if (k == 0)
      t = 1.0 / (4.0 * ds * ds);
    else if (k % 2 != 0)
      t = -1.0 / (kPi * kPi * static_cast<double>(k * k) * ds * ds);
    taps[j] = t;
    total += t;
  }
  const double mean = total / static_cast<double>(n_pad);
  for (auto& t : taps) t -= mean;  // zero DC gain

  std::vector<double> out(n_s, 0.0);
  for (std::size_t i = 0; i < n_s; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < n_s; ++j)
      acc += view[j] * taps[(i + n_pad - j) % n_pad];
    out[i] = acc * ds;
  }
  return out;
}

ParallelSinogram one_view(const std::vector<double>& values, double s_max) {
  ParallelSinogram sino;
  sino.n_s = values.size();
  sino.n_views = 1;
  sino.s_max_mm = s_max;
  sino.phi_deg = {0.0};
  sino.values = values;
  return sino;
}

}  // namespace

TEST_CASE("row extraction carries geometry and height") {
  AttenuationStack stack;
  stack.rows = 4;
  stack.cols = 16;
  stack.n_angles = 3;
  stack.angles_deg = {0, 120, 240};
  stack.crop = CropRegion{5, 10, 16, 4};
  EffectiveGeometry g;
  g.f_eff_px = 5000;
  g.axis_distance_mm = 50;
  g.c_x = 12.0;
  g.c_y = 9.5;
  stack.geometry = g;
  stack.data.resize(3 * 4 * 16);
  for (std::size_t i = 0; i < stack.data.size(); ++i)
    stack.data[i] = static_cast<double>(i);

  FanSinogram fan = extract_row_sinogram(stack, 2);
  CHECK(fan.n_cols == 16);
  CHECK(fan.n_views == 3);
  CHECK(fan.u0 == doctest::Approx(5.0));
  CHECK(fan.row == 2);
  // Full-frame detector row 10 + 2 sits (12 - 9.5) px above the principal
  // point, at axis-plane height (v - c_y) * D / f.
  CHECK(fan.z_mm == doctest::Approx(2.5 * 50.0 / 5000.0));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t c = 0; c < 16; ++c)
      CHECK(fan.at(k, c) == doctest::Approx(stack.at(k, 2, c)));

  CHECK_THROWS_AS(extract_row_sinogram(stack, 4), Error);
  stack.geometry.reset();
  try {
    extract_row_sinogram(stack, 0);
    FAIL("expected missing geometry");
  } catch (const Error& e) {
    CHECK(e.code() == errc::geometry_missing);
  }
}

TEST_CASE("rebin grid: aperture, sample count and angle reuse") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0, 0, 0.2, 1.0));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 256, 90);
  ParallelSinogram par = fan_to_parallel_rebin(extract_row_sinogram(stack, 0));

  CHECK(par.n_s == 256);
  CHECK(par.n_views == 90);
  CHECK(par.phi_deg == stack.angles_deg);
  const double gamma_max = std::atan(127.5 / 6500.0);
  CHECK(par.s_max_mm == doctest::Approx(50.0 * std::sin(gamma_max)));
  CHECK(par.s(0) == doctest::Approx(-par.s_max_mm));
  CHECK(par.s(255) == doctest::Approx(par.s_max_mm));
}

TEST_CASE("on-axis samples survive rebinning untouched") {
  // With an odd column count and centred principal point, (s, phi) = (0,
  // theta_k) lands exactly on fan grid nodes.
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0.05, -0.1, 0.3, 1.0));
  EffectiveGeometry g = axis_geometry();
  g.c_x = 127.0;
  AttenuationStack stack = fan_stack(ph, g, 255, 120);
  FanSinogram fan = extract_row_sinogram(stack, 0);
  ParallelSinogram par = fan_to_parallel_rebin(fan);
  REQUIRE(par.n_s == 255);
  for (std::size_t k = 0; k < par.n_views; ++k) {
    CHECK(par.s(127) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(par.at(k, 127) == doctest::Approx(fan.at(k, 127)).epsilon(1e-12));
  }
}

TEST_CASE("rebinned centred disk matches the analytic parallel sinogram") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0, 0, 0.5, 1.0));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 256, 360);
  ParallelSinogram par = fan_to_parallel_rebin(extract_row_sinogram(stack, 0));

  const double peak = 2.0 * 1.0 * 0.5;
  double max_err = 0;
  for (std::size_t k = 0; k < par.n_views; ++k) {
    for (std::size_t i = 0; i < par.n_s; ++i) {
      const double s = par.s(i);
      const double expected =
          s * s < 0.25 ? 2.0 * std::sqrt(0.25 - s * s) : 0.0;
      max_err = std::max(max_err, std::abs(par.at(k, i) - expected));
    }
  }
  CHECK(max_err < 0.02 * peak);
}

TEST_CASE("per-view mass is preserved by rebinning") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0.1, -0.05, 0.4, 1.5));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 256, 180);
  ParallelSinogram par = fan_to_parallel_rebin(extract_row_sinogram(stack, 0));

  std::vector<double> mass(par.n_views, 0.0);
  double mean = 0;
  for (std::size_t k = 0; k < par.n_views; ++k) {
    for (std::size_t i = 0; i < par.n_s; ++i) mass[k] += par.at(k, i);
    mass[k] *= par.ds();
    mean += mass[k];
  }
  mean /= static_cast<double>(par.n_views);
  const double analytic = 1.5 * kPi * 0.4 * 0.4;
  CHECK(mean == doctest::Approx(analytic).epsilon(0.02));
  for (std::size_t k = 0; k < par.n_views; ++k)
    CHECK(std::abs(mass[k] - mean) < 0.02 * mean);
}

TEST_CASE("partial turns are rejected") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0, 0, 0.2, 1.0));
  EffectiveGeometry g = axis_geometry();

  AttenuationStack stack = fan_stack(ph, g, 64, 90);
  // Compress the same views into a quarter turn.
  for (std::size_t k = 0; k < 90; ++k) stack.angles_deg[k] = 0.25 * stack.angles_deg[k];
  try {
    fan_to_parallel_rebin(extract_row_sinogram(stack, 0));
    FAIL("expected rejection of a quarter turn");
  } catch (const Error& e) {
    CHECK(e.cls() == error_class::data);
  }
}

TEST_CASE("frequency gain is zero at DC and tapered by Hann") {
  const std::size_t n_s = 64;
  const double ds = 0.01;
  std::vector<double> ramp_gain = ramp_filter_gain(n_s, ds, FilterKind::ramp);
  std::vector<double> hann_gain =
      ramp_filter_gain(n_s, ds, FilterKind::ramp_hann);
  const std::size_t n_pad = ramp_gain.size();
  CHECK(n_pad == 128);
  CHECK(ramp_gain[0] == 0.0);
  CHECK(hann_gain[0] == 0.0);
  for (std::size_t j = 1; j < n_pad; ++j) {
    CHECK(ramp_gain[j] > 0.0);
    // Mirrored bins carry the same magnitude.
    CHECK(ramp_gain[j] == doctest::Approx(ramp_gain[n_pad - j]).epsilon(1e-9));
    const double w = std::cos(kPi * static_cast<double>(j) /
                              static_cast<double>(n_pad));
    CHECK(hann_gain[j] == doctest::Approx(ramp_gain[j] * w * w).epsilon(1e-12));
  }
  CHECK(hann_gain[n_pad / 2] == doctest::Approx(0.0));
  // The ramp grows toward Nyquist.
  CHECK(ramp_gain[n_pad / 2] > ramp_gain[n_pad / 4]);
  CHECK(ramp_gain[n_pad / 4] > ramp_gain[1]);
}

TEST_CASE("filtered impulse equals the direct convolution") {
  const std::size_t n_s = 16;
  const double s_max = 1.0;
  std::vector<double> impulse(n_s, 0.0);
  impulse[7] = 1.0;
  ParallelSinogram sino = one_view(impulse, s_max);
  const double ds = sino.ds();
  ParallelSinogram filtered = ramp_filter(sino);
  std::vector<double> expected = direct_ramp(impulse, ds);
  const double scale = 1.0 / (4.0 * ds);
  for (std::size_t i = 0; i < n_s; ++i)
    CHECK(std::abs(filtered.at(0, i) - expected[i]) < 1e-12 * scale);
}

TEST_CASE("filtered constant view equals the direct convolution") {
  const std::size_t n_s = 24;
  std::vector<double> ones(n_s, 1.0);
  ParallelSinogram sino = one_view(ones, 2.0);
  ParallelSinogram filtered = ramp_filter(sino);
  std::vector<double> expected = direct_ramp(ones, sino.ds());
  const double scale = 1.0 / (4.0 * sino.ds());
  for (std::size_t i = 0; i < n_s; ++i)
    CHECK(std::abs(filtered.at(0, i) - expected[i]) < 1e-12 * scale);
}

TEST_CASE("zero sinogram filters to zero and backprojects to zero") {
  ParallelSinogram sino = one_view(std::vector<double>(32, 0.0), 1.0);
  ParallelSinogram filtered = ramp_filter(sino);
  for (double v : filtered.values) CHECK(v == 0.0);
  ReconConfig rc;
  rc.grid_size = 16;
  rc.pixel_size_mm = 0.1;
  ReconSlice slice = backproject(filtered, rc);
  for (double v : slice.values) CHECK(v == 0.0);
}

TEST_CASE("backprojection is linear") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0.1, 0.0, 0.3, 1.0));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 128, 45);
  ParallelSinogram par = fan_to_parallel_rebin(extract_row_sinogram(stack, 0));
  ParallelSinogram filtered = ramp_filter(par);
  ParallelSinogram doubled = filtered;
  for (auto& v : doubled.values) v *= 2.0;

  ReconConfig rc;
  rc.grid_size = 64;
  ReconSlice a = backproject(filtered, rc);
  ReconSlice b = backproject(doubled, rc);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values[i] == doctest::Approx(2.0 * a.values[i]).epsilon(1e-12));
}

TEST_CASE("uniform disk reconstructs to its attenuation level") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0, 0, 0.5, 1.0));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 256, 360);

  ReconConfig rc;
  rc.grid_size = 256;
  ReconSlice slice = reconstruct_slice(stack, 0, rc);
  CHECK(slice.pixel_size_mm == doctest::Approx(50.0 / 6500.0));

  const double ps = slice.pixel_size_mm;
  const double half = (256.0 - 1.0) / 2.0;
  double disk_sum = 0, air_sum = 0;
  std::size_t disk_n = 0, air_n = 0;
  for (std::size_t iy = 0; iy < 256; ++iy) {
    const double y = (static_cast<double>(iy) - half) * ps;
    for (std::size_t ix = 0; ix < 256; ++ix) {
      const double x = (static_cast<double>(ix) - half) * ps;
      const double rr = std::hypot(x, y);
      if (rr < 0.5 - 2.0 * ps) {
        disk_sum += slice.at(iy, ix);
        ++disk_n;
      } else if (rr > 0.5 + 2.0 * ps && rr < 0.9) {
        air_sum += slice.at(iy, ix);
        ++air_n;
      }
    }
  }
  REQUIRE(disk_n > 0);
  REQUIRE(air_n > 0);
  CHECK(disk_sum / static_cast<double>(disk_n) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(air_sum / static_cast<double>(air_n)) < 0.02);
}

TEST_CASE("explicit pixel size overrides the axis footprint") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_disk(0, 0, 0.3, 1.0));
  EffectiveGeometry g = axis_geometry();
  AttenuationStack stack = fan_stack(ph, g, 64, 36);
  ReconConfig rc;
  rc.grid_size = 32;
  rc.pixel_size_mm = 0.03;
  ReconSlice slice = reconstruct_slice(stack, 0, rc);
  CHECK(slice.pixel_size_mm == doctest::Approx(0.03));
}

TEST_CASE("volume stacking is per-row independent and deterministic") {
  DigitalPhantom ph;
  ph.primitives.push_back(make_sphere(0.1, 0.0, 0.0, 0.25, 1.0));

  SimulationConfig cfg;
  cfg.geometry = axis_geometry();
  cfg.geometry.c_y = 2.5;
  cfg.crop = CropRegion{64, 0, 128, 6};
  cfg.angles_deg.resize(60);
  for (std::size_t i = 0; i < 60; ++i)
    cfg.angles_deg[i] = 6.0 * static_cast<double>(i);
  cfg.i0 = 4000;

  ProjectionStack acq = simulate_acquisition(ph, cfg);
  IncidentField field = estimate_incident_field(acq, {12, 12, 3});
  AttenuationStack mu = beer_lambert(acq, field);

  ReconConfig rc;
  rc.grid_size = 48;
  Volume v1 = reconstruct_volume(mu, rc, 1);
  Volume v3 = reconstruct_volume(mu, rc, 3);
  REQUIRE(v1.data.size() == 48 * 48 * 6);
  CHECK(std::memcmp(v1.data.data(), v3.data.data(),
                    v1.data.size() * sizeof(double)) == 0);

  const double pitch = 50.0 / 6500.0;
  CHECK(v1.slice_pitch_mm == doctest::Approx(pitch));
  for (std::size_t row = 0; row < 6; ++row) {
    CHECK(v1.slice_z_mm[row] ==
          doctest::Approx((static_cast<double>(row) - 2.5) * pitch));
    ReconSlice slice = reconstruct_slice(mu, row, rc);
    for (std::size_t i = 0; i < slice.values.size(); ++i)
      CHECK(v1.data[row * 48 * 48 + i] == slice.values[i]);
  }

  mu.geometry.reset();
  CHECK_THROWS_AS(reconstruct_volume(mu, rc), Error);
}
