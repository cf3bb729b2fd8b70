#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "opttomo/attenuation.hpp"
#include "opttomo/calib.hpp"
#include "opttomo/raw.hpp"

namespace opttomo {

// Shapes live in the object frame: the rotation axis is z, and disks and
// ellipses extend as infinite vertical cylinders so every slice sees them.
enum class ShapeKind { disk, ellipse, sphere, cylinder };

struct PhantomPrimitive {
  ShapeKind kind = ShapeKind::sphere;
  std::array<double, 3> center{0, 0, 0};  // mm
  double radius_x = 0;  // mm; semi-axis along x (radius for circular shapes)
  double radius_y = 0;  // mm; semi-axis along y
  double half_height = 0;  // mm; cylinder only, z extent center +- half
  double mu = 0;           // 1/mm; attenuations add where shapes overlap
};

PhantomPrimitive make_disk(double cx, double cy, double r, double mu);
PhantomPrimitive make_ellipse(double cx, double cy, double rx, double ry,
                              double mu);
PhantomPrimitive make_sphere(double cx, double cy, double cz, double r,
                             double mu);
PhantomPrimitive make_cylinder(double cx, double cy, double cz, double r,
                               double half_height, double mu);

struct DigitalPhantom {
  std::vector<PhantomPrimitive> primitives;
};

// Line integral along the ray origin + t * dir, dir need not be unit length.
double ray_integral(const DigitalPhantom& phantom,
                    const std::array<double, 3>& origin,
                    const std::array<double, 3>& dir);

// Radon value at signed axis offset s and view angle phi, at height z.
double analytic_parallel_projection(const DigitalPhantom& phantom, double s_mm,
                                    double phi_deg, double z_mm = 0);

enum class FanMode {
  planar,   // each detector row sees only its own z plane
  oblique,  // rays converge through the optical centre in v as well
};

// Divergent-beam line integral for full-frame detector pixel (u, v) at
// turntable angle theta.
double analytic_fan_projection(const DigitalPhantom& phantom,
                               const EffectiveGeometry& geometry, double u_px,
                               double v_px, double theta_deg,
                               FanMode mode = FanMode::planar);

enum class NoiseModel { none, poisson };

struct SimulationConfig {
  EffectiveGeometry geometry;
  CropRegion crop;  // detector window; width/height define the frame size
  std::vector<double> angles_deg;
  double i0 = 3000;                 // incident level, raw code units
  std::vector<double> vignetting;   // per-row gain, size crop.height or empty
  NoiseModel noise = NoiseModel::none;
  double counts_per_code = 1.0;     // photon counts represented by one code
  FanMode mode = FanMode::planar;
  std::uint64_t seed = 0;
  int bit_depth = 12;
};

// Transmission stack I = i0 * g(v) * exp(-integral), with optional Poisson
// noise keyed by (seed, pixel index) so the result is schedule independent.
ProjectionStack simulate_acquisition(const DigitalPhantom& phantom,
                                     const SimulationConfig& config,
                                     unsigned threads = 0);

// Quantized mosaic for the frame at angle index k: green sites carry the
// simulated signal, red/blue sites carry 0.8x the local signal.
BayerMosaic mosaic_from_stack(const ProjectionStack& stack, std::size_t angle,
                              BayerPattern pattern);

struct VoxelGridSpec {
  std::size_t n = 0;            // grid is n x n in x,y
  double pixel_size_mm = 0;     // centred on the rotation axis
  std::vector<double> z_levels_mm;  // one slice per entry
};

// Ground-truth voxelization by centre-point sampling, attenuations additive.
std::vector<double> rasterize_phantom(const DigitalPhantom& phantom,
                                      const VoxelGridSpec& grid);

// Attenuation value of the phantom at a point (centre-point membership).
double phantom_value_at(const DigitalPhantom& phantom, double x_mm, double y_mm,
                        double z_mm);

}  // namespace opttomo
