#include "opttomo/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "opttomo/errors.hpp"
#include "opttomo/parallel.hpp"
#include "opttomo/random.hpp"

namespace opttomo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Interval {
  double lo = 0;
  double hi = 0;
  bool hit = false;
};

// Parameter interval of the ray inside an axis-aligned elliptic cylinder of
// infinite height. dir may be non-unit; the interval is in ray parameter t.
Interval elliptic_cylinder_interval(const PhantomPrimitive& p,
                                    const std::array<double, 3>& o,
                                    const std::array<double, 3>& d) {
  const double ox = (o[0] - p.center[0]) / p.radius_x;
  const double oy = (o[1] - p.center[1]) / p.radius_y;
  const double dx = d[0] / p.radius_x;
  const double dy = d[1] / p.radius_y;
  const double a = dx * dx + dy * dy;
  if (a <= 1e-300) return {};  // ray parallel to the axis; outside or ill-posed
  const double b = ox * dx + oy * dy;
  const double c = ox * ox + oy * oy - 1.0;
  const double disc = b * b - a * c;
  if (disc <= 0) return {};
  const double sq = std::sqrt(disc);
  return {(-b - sq) / a, (-b + sq) / a, true};
}

double norm3(const std::array<double, 3>& d) {
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

double primitive_ray_chord(const PhantomPrimitive& p,
                           const std::array<double, 3>& o,
                           const std::array<double, 3>& d, double dlen) {
  switch (p.kind) {
    case ShapeKind::disk:
    case ShapeKind::ellipse: {
      Interval iv = elliptic_cylinder_interval(p, o, d);
      return iv.hit ? (iv.hi - iv.lo) * dlen : 0.0;
    }
    case ShapeKind::sphere: {
      const double ox = o[0] - p.center[0];
      const double oy = o[1] - p.center[1];
      const double oz = o[2] - p.center[2];
      const double a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
      const double b = ox * d[0] + oy * d[1] + oz * d[2];
      const double c = ox * ox + oy * oy + oz * oz - p.radius_x * p.radius_x;
      const double disc = b * b - a * c;
      if (disc <= 0) return 0.0;
      return 2.0 * std::sqrt(disc) / a * dlen;
    }
    case ShapeKind::cylinder: {
      Interval iv = elliptic_cylinder_interval(p, o, d);
      if (!iv.hit) return 0.0;
      const double z_lo = p.center[2] - p.half_height;
      const double z_hi = p.center[2] + p.half_height;
      if (d[2] == 0.0) {
        if (o[2] < z_lo || o[2] > z_hi) return 0.0;
        return (iv.hi - iv.lo) * dlen;
      }
      double t0 = (z_lo - o[2]) / d[2];
      double t1 = (z_hi - o[2]) / d[2];
      if (t0 > t1) std::swap(t0, t1);
      const double lo = std::max(iv.lo, t0);
      const double hi = std::min(iv.hi, t1);
      return hi > lo ? (hi - lo) * dlen : 0.0;
    }
  }
  return 0.0;
}

void validate_primitive(const PhantomPrimitive& p) {
  if (!(p.radius_x > 0))
    fail(errc::config_error, "primitive radius must be positive");
  if (p.kind != ShapeKind::sphere && !(p.radius_y > 0))
    fail(errc::config_error, "primitive semi-axes must be positive");
  if (p.kind == ShapeKind::cylinder && !(p.half_height > 0))
    fail(errc::config_error, "cylinder height must be positive");
}

}  // namespace

PhantomPrimitive make_disk(double cx, double cy, double r, double mu) {
  return {ShapeKind::disk, {cx, cy, 0}, r, r, 0, mu};
}

PhantomPrimitive make_ellipse(double cx, double cy, double rx, double ry,
                              double mu) {
  return {ShapeKind::ellipse, {cx, cy, 0}, rx, ry, 0, mu};
}

PhantomPrimitive make_sphere(double cx, double cy, double cz, double r,
                             double mu) {
  return {ShapeKind::sphere, {cx, cy, cz}, r, r, 0, mu};
}

PhantomPrimitive make_cylinder(double cx, double cy, double cz, double r,
                               double half_height, double mu) {
  return {ShapeKind::cylinder, {cx, cy, cz}, r, r, half_height, mu};
}

double ray_integral(const DigitalPhantom& phantom,
                    const std::array<double, 3>& origin,
                    const std::array<double, 3>& dir) {
  const double dlen = norm3(dir);
  if (!(dlen > 0)) fail(errc::config_error, "ray direction must be non-zero");
  double sum = 0;
  for (const auto& p : phantom.primitives) {
    validate_primitive(p);
    sum += p.mu * primitive_ray_chord(p, origin, dir, dlen);
  }
  return sum;
}

double analytic_parallel_projection(const DigitalPhantom& phantom, double s_mm,
                                    double phi_deg, double z_mm) {
  const double phi = phi_deg * kDegToRad;
  const std::array<double, 3> origin{s_mm * std::cos(phi), s_mm * std::sin(phi),
                                     z_mm};
  const std::array<double, 3> dir{-std::sin(phi), std::cos(phi), 0.0};
  return ray_integral(phantom, origin, dir);
}

double analytic_fan_projection(const DigitalPhantom& phantom,
                               const EffectiveGeometry& geometry, double u_px,
                               double v_px, double theta_deg, FanMode mode) {
  if (!(geometry.f_eff_px > 0) || !(geometry.axis_distance_mm > 0))
    fail(errc::geometry_missing, "fan projection needs a valid geometry");

  const double theta = theta_deg * kDegToRad;
  const double d_mm = geometry.axis_distance_mm;
  const double tan_gamma = (u_px - geometry.c_x) / geometry.f_eff_px;
  const double gamma = std::atan(tan_gamma);

  // Camera centre placed so a ray deflected by gamma has parallel-beam
  // coordinates (s, phi) = (D sin(gamma), theta + gamma).
  const double cam_x = -d_mm * std::sin(theta);
  const double cam_y = d_mm * std::cos(theta);

  if (mode == FanMode::planar) {
    const double z =
        (v_px - geometry.c_y) * d_mm / geometry.f_eff_px;
    const std::array<double, 3> origin{cam_x, cam_y, z};
    const std::array<double, 3> dir{-std::sin(theta + gamma),
                                    std::cos(theta + gamma), 0.0};
    return ray_integral(phantom, origin, dir);
  }

  const double tan_rho = (v_px - geometry.c_y) / geometry.f_eff_px;
  // Unit vector from the camera toward the axis, and the in-plane normal.
  const double ax = std::sin(theta);
  const double ay = -std::cos(theta);
  const double rx = std::cos(theta);
  const double ry = std::sin(theta);
  const std::array<double, 3> origin{cam_x, cam_y, 0.0};
  const std::array<double, 3> dir{ax + tan_gamma * rx, ay + tan_gamma * ry,
                                  tan_rho};
  return ray_integral(phantom, origin, dir);
}

ProjectionStack simulate_acquisition(const DigitalPhantom& phantom,
                                     const SimulationConfig& config,
                                     unsigned threads) {
  const std::size_t rows = config.crop.height;
  const std::size_t cols = config.crop.width;
  if (rows == 0 || cols == 0)
    fail(errc::config_error, "simulated frame must be non-empty");
  if (config.angles_deg.size() < 2)
    fail(errc::config_error, "simulation needs at least 2 angles");
  if (!(config.i0 > 0))
    fail(errc::config_error, "incident level must be positive");
  if (!(config.counts_per_code > 0))
    fail(errc::config_error, "counts per code must be positive");
  if (config.bit_depth < 10 || config.bit_depth > 16)
    fail(errc::config_error, "bit depth must be in 10..16");
  if (!config.vignetting.empty() && config.vignetting.size() != rows)
    fail(errc::dimension_mismatch,
         "vignetting profile length must equal the row count");
  for (double g : config.vignetting)
    if (!(g > 0)) fail(errc::config_error, "vignetting gains must be positive");
  for (const auto& p : phantom.primitives) validate_primitive(p);

  for (std::size_t k = 0; k + 1 < config.angles_deg.size(); ++k) {
    if (!(config.angles_deg[k + 1] > config.angles_deg[k]))
      fail(errc::config_error, "simulation angles must be strictly increasing");
  }

  ProjectionStack stack;
  stack.rows = rows;
  stack.cols = cols;
  stack.n_angles = config.angles_deg.size();
  stack.angles_deg = config.angles_deg;
  stack.crop = config.crop;
  stack.bit_depth = config.bit_depth;
  stack.full_scale = std::exp2(config.bit_depth);
  stack.geometry = config.geometry;
  stack.data.resize(stack.n_angles * rows * cols);

  parallel_for(stack.n_angles, threads, [&](std::size_t a) {
    const double theta = config.angles_deg[a];
    for (std::size_t r = 0; r < rows; ++r) {
      const double gain = config.vignetting.empty() ? 1.0 : config.vignetting[r];
      const double v = static_cast<double>(config.crop.v0 + r);
      for (std::size_t c = 0; c < cols; ++c) {
        const double u = static_cast<double>(config.crop.u0 + c);
        const double line =
            analytic_fan_projection(phantom, config.geometry, u, v, theta,
                                    config.mode);
        double intensity = config.i0 * gain * std::exp(-line);
        if (config.noise == NoiseModel::poisson) {
          const std::uint64_t stream = (a * rows + r) * cols + c;
          StreamRng rng(config.seed, stream);
          intensity = static_cast<double>(
                          rng.poisson(intensity * config.counts_per_code)) /
                      config.counts_per_code;
        }
        stack.at(a, r, c) = intensity;
      }
    }
  });
  return stack;
}

BayerMosaic mosaic_from_stack(const ProjectionStack& stack, std::size_t angle,
                              BayerPattern pattern) {
  if (angle >= stack.n_angles)
    fail(errc::row_out_of_range, "angle index out of range");
  if (stack.cols % 2 != 0 || stack.rows % 2 != 0)
    fail(errc::odd_dimensions, "mosaic dimensions must be even");

  const double limit = stack.full_scale - 1.0;
  BayerMosaic m;
  m.width = stack.cols;
  m.height = stack.rows;
  m.bit_depth = stack.bit_depth;
  m.pattern = pattern;
  m.angle_deg = stack.angles_deg[angle];
  m.samples.resize(stack.cols * stack.rows);
  for (std::size_t r = 0; r < stack.rows; ++r) {
    for (std::size_t c = 0; c < stack.cols; ++c) {
      double value = stack.at(angle, r, c);
      if (!is_green_site(pattern, r, c)) value *= 0.8;
      value = std::clamp(std::round(value), 0.0, limit);
      m.samples[r * stack.cols + c] = static_cast<std::uint16_t>(value);
    }
  }
  return m;
}

double phantom_value_at(const DigitalPhantom& phantom, double x_mm, double y_mm,
                        double z_mm) {
  double sum = 0;
  for (const auto& p : phantom.primitives) {
    const double dx = x_mm - p.center[0];
    const double dy = y_mm - p.center[1];
    switch (p.kind) {
      case ShapeKind::disk:
      case ShapeKind::ellipse: {
        const double q = (dx / p.radius_x) * (dx / p.radius_x) +
                         (dy / p.radius_y) * (dy / p.radius_y);
        if (q <= 1.0) sum += p.mu;
        break;
      }
      case ShapeKind::sphere: {
        const double dz = z_mm - p.center[2];
        if (dx * dx + dy * dy + dz * dz <= p.radius_x * p.radius_x) sum += p.mu;
        break;
      }
      case ShapeKind::cylinder: {
        if (dx * dx + dy * dy <= p.radius_x * p.radius_x &&
            std::abs(z_mm - p.center[2]) <= p.half_height)
          sum += p.mu;
        break;
      }
    }
  }
  return sum;
}

std::vector<double> rasterize_phantom(const DigitalPhantom& phantom,
                                      const VoxelGridSpec& grid) {
  if (grid.n == 0 || !(grid.pixel_size_mm > 0) || grid.z_levels_mm.empty())
    fail(errc::config_error, "voxel grid must be non-empty");
  for (const auto& p : phantom.primitives) validate_primitive(p);

  const double half = (static_cast<double>(grid.n) - 1.0) / 2.0;
  std::vector<double> out(grid.n * grid.n * grid.z_levels_mm.size());
  std::size_t idx = 0;
  for (double z : grid.z_levels_mm) {
    for (std::size_t iy = 0; iy < grid.n; ++iy) {
      const double y = (static_cast<double>(iy) - half) * grid.pixel_size_mm;
      for (std::size_t ix = 0; ix < grid.n; ++ix, ++idx) {
        const double x = (static_cast<double>(ix) - half) * grid.pixel_size_mm;
        out[idx] = phantom_value_at(phantom, x, y, z);
      }
    }
  }
  return out;
}

}  // namespace opttomo
