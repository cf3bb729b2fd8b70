#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace opttomo {

struct PixelPoint {
  double u = 0;
  double v = 0;
};

// Four detected corners of one checkerboard square, ordered to match the
// canonical unit square (0,0), (1,0), (0,1), (1,1). plane_id groups squares
// that were captured in the same target pose.
struct SquareObservation {
  std::array<PixelPoint, 4> corners{};
  int plane_id = 0;
};

// Similarity x' = alpha * (x - t): centroid of the generating points goes to
// the origin and their mean distance from it becomes sqrt(2).
struct NormalizationTransform {
  double alpha = 1.0;
  double t_u = 0.0;
  double t_v = 0.0;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;
  PixelPoint apply(const PixelPoint& p) const;
};

// Plane-to-image homography, Frobenius norm 1, h33 >= 0.
struct Homography {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
};

// Image of the absolute conic under the zero-skew model: symmetric, w12 = 0,
// unit Frobenius norm, w11 > 0.
struct AbsoluteConicImage {
  Eigen::Matrix3d omega = Eigen::Matrix3d::Identity();
};

struct CameraIntrinsics {
  double f_x = 0;  // px
  double f_y = 0;  // px
  double c_x = 0;  // px
  double c_y = 0;  // px

  Eigen::Matrix3d normalized_k = Eigen::Matrix3d::Identity();
  NormalizationTransform normalization;

  Eigen::Matrix3d matrix() const;
};

struct CalibrationOptions {
  bool normalize = true;
};

struct CalibrationReport {
  CameraIntrinsics intrinsics;
  // Algebraic residual of the conic constraint system at the solution.
  double constraint_residual = 0;
  // RMS distance (px) between observed corners and canonical corners mapped
  // through each square's homography.
  double corner_residual_px = 0;
  std::vector<std::string> warnings;
};

// One measurement of a resolution target feature: its physical width, the
// width it subtends on the sensor, and the camera-to-target distance.
struct TargetMeasurement {
  double feature_width_mm = 0;
  double feature_width_px = 0;
  double distance_mm = 0;
};

struct MagnificationEstimate {
  double magnification = 0;
  double bare_extent_rad_per_px = 0;  // angular extent per pixel, no lens
  double lens_extent_rad_per_px = 0;  // angular extent per pixel, with lens
};

// Calibrated quantities in the frame used by reconstruction.
struct EffectiveGeometry {
  double f_eff_px = 0;        // focal length through the lens, px
  double pixel_pitch_mm = 0;  // physical sensor pitch
  double c_x = 0;             // principal point, full-frame px
  double c_y = 0;
  double axis_distance_mm = 0;  // principal point to rotation axis
};

NormalizationTransform compute_normalization(std::span<const PixelPoint> points);

// Direct linear transform from the canonical unit square to the observed
// corners. Corners are expected in normalized coordinates.
Homography estimate_square_homography(const SquareObservation& square);

// Two rows per homography, unknowns (w11, w13, w22, w23, w33).
Eigen::MatrixXd assemble_iac_constraints(std::span<const Homography> homographies);

AbsoluteConicImage solve_iac(const Eigen::MatrixXd& constraints);

// Cholesky-based recovery: upper-triangular K with K33 = 1, positive diagonal.
Eigen::Matrix3d recover_intrinsics(const AbsoluteConicImage& conic);

CameraIntrinsics denormalize_intrinsics(const Eigen::Matrix3d& k_normalized,
                                        const NormalizationTransform& transform);

CalibrationReport calibrate(std::span<const SquareObservation> squares,
                            const CalibrationOptions& options = {});

// Synthetic observation for testing and self checks: the square with plane
// coordinates origin + side * (i, j), i, j in {0, 1}, z = 0, imaged by k
// under the rigid pose x_cam = rotation * x_plane + translation.
SquareObservation project_square(const Eigen::Matrix3d& k,
                                 const Eigen::Matrix3d& rotation,
                                 const Eigen::Vector3d& translation,
                                 double origin_x, double origin_y, double side,
                                 int plane_id);

// Bar width in micrometres for a 1951 resolution target element.
double usaf_line_width_um(int group, int element);

MagnificationEstimate estimate_magnification(const TargetMeasurement& bare,
                                             const TargetMeasurement& with_lens);

EffectiveGeometry derive_effective_geometry(const CameraIntrinsics& intrinsics,
                                            const MagnificationEstimate& mag,
                                            double f_bare_mm,
                                            double axis_distance_mm);

}  // namespace opttomo
